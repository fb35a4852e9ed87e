//! The solver against a plain minimax over the rules engine, with no
//! transposition table and no symmetry reduction.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use starclip_core::solver::{position_outcome, solve, Budget, CanonMode, Position, Solver};
use starclip_core::{Edge, Outcome, PlayerId, StarState, Status};

/// +1 if the player to move wins, 0 draw, -1 loss.
fn brute(gs: &StarState) -> i8 {
    let me = gs.to_move();
    let mut best = -1;
    for e in gs.legal_moves().unwrap() {
        let mut next = gs.clone();
        next.apply_move(e).unwrap();
        let v = match next.status() {
            Status::Lost { player, .. } if player == me => -1,
            Status::Lost { .. } => 1,
            Status::Draw => 0,
            Status::Ongoing => -brute(&next),
        };
        best = best.max(v);
        if best == 1 {
            break;
        }
    }
    best
}

fn brute_outcome(gs: &StarState) -> Outcome {
    match brute(gs) {
        1 => Outcome::loss_of(gs.to_move().other()),
        -1 => Outcome::loss_of(gs.to_move()),
        _ => Outcome::Draw,
    }
}

const MODES: [CanonMode; 3] = [CanonMode::None, CanonMode::FullPermutation, CanonMode::RefinementHash];

#[test]
fn empty_boards_agree_with_brute_force() {
    for (n, k) in [(2, 1), (3, 1), (4, 1), (5, 1), (3, 2), (4, 2), (5, 2)] {
        let want = brute_outcome(&StarState::new(n, k).unwrap());
        for mode in MODES {
            let got = solve(n, k, Budget::UNLIMITED, mode).unwrap().outcome;
            assert_eq!(got, want, "n={n} k={k} mode={mode}");
        }
    }
}

#[test]
fn random_midgame_positions_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 300 {
        let (n, k) = *[(5, 1), (6, 1), (5, 2), (6, 2), (6, 3)].choose(&mut rng).unwrap();
        let mut gs = StarState::new(n, k).unwrap();
        let plies = match n {
            5 => 2..7,
            _ => 6..11,
        };
        let target = *plies.collect::<Vec<_>>().choose(&mut rng).unwrap();
        while gs.is_ongoing() && gs.history().len() < target {
            let me = gs.to_move();
            let safe: Vec<Edge> = gs
                .legal_moves()
                .unwrap()
                .into_iter()
                .filter(|&e| gs.is_safe_for(me, e))
                .collect();
            match safe.choose(&mut rng) {
                Some(&e) => gs.apply_move(e).unwrap(),
                None => break,
            }
        }
        if !gs.is_ongoing() || gs.unclaimed_count() == 0 {
            continue;
        }
        let want = brute_outcome(&gs);
        let p = Position::from_star(&gs).unwrap();
        for mode in MODES {
            assert_eq!(position_outcome(&p, mode).unwrap(), want, "{:?} mode={mode}", gs.history());
        }
        checked += 1;
    }
}

#[test]
fn best_move_principal_variation_replays() {
    // Both sides follow the solver; the rules engine must end with the solved outcome.
    for (n, k) in [(3, 1), (5, 1), (4, 2), (5, 2), (6, 2)] {
        let result = solve(n, k, Budget::UNLIMITED, CanonMode::default_for(n)).unwrap();
        let mut solver = Solver::new(CanonMode::default_for(n), Budget::UNLIMITED);
        let mut gs = StarState::new(n, k).unwrap();
        while gs.is_ongoing() {
            let p = Position::from_star(&gs).unwrap();
            let (e, _) = solver.best_move(&p).unwrap();
            gs.apply_move(e).unwrap();
        }
        assert_eq!(gs.outcome(), Some(result.outcome), "n={n} k={k}");
    }
}

#[test]
fn second_player_reply_on_three() {
    let gs = StarState::from_moves(3, 1, [Edge::new(0, 1)]).unwrap();
    assert_eq!(gs.to_move(), PlayerId::Second);
    let p = Position::from_star(&gs).unwrap();
    let mut s = Solver::new(CanonMode::None, Budget::UNLIMITED);
    let (e, v) = s.best_move(&p).unwrap();
    assert_eq!(v, 1);
    let mut after = gs.clone();
    after.apply_move(e).unwrap();
    assert_eq!(brute_outcome(&after), Outcome::SecondWin);
}
