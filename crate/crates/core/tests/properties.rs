use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use starclip_core::adversary::{AdversaryPolicy, PolicyKind};
use starclip_core::harness::{random_fg_sparse, run_game, RunConfig, Transcript};
use starclip_core::pcg::{play_pcg, PcgPolicy, PiMove};
use starclip_core::solver::{canonicalize, isomorphic, CanonMode, Position};
use starclip_core::{Edge, Outcome, PlayerId, SparseProfile, StarState, Status, WorkGraph};

#[derive(Debug, Clone)]
enum Op {
    Add(usize, usize),
    Clip(usize, usize),
}

fn ops(v: usize) -> impl Strategy<Value = Vec<Op>> {
    let op = prop_oneof![
        4 => (0..v, 0..v).prop_map(|(a, b)| Op::Add(a, b)),
        1 => (0..v, 0..v).prop_map(|(a, b)| Op::Clip(a, b)),
    ];
    prop::collection::vec(op, 0..80)
}

/// Random play where each side avoids losing while it can.
fn playout(n: usize, k: usize, plies: usize, seed: u64) -> StarState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gs = StarState::new(n, k).unwrap();
    while gs.is_ongoing() && gs.history().len() < plies {
        let open = gs.legal_moves().unwrap();
        let me = gs.to_move();
        let safe: Vec<Edge> = open.iter().copied().filter(|&e| gs.is_safe_for(me, e)).collect();
        let pool = if safe.is_empty() { &open } else { &safe };
        gs.apply_move(*pool.choose(&mut rng).unwrap()).unwrap();
    }
    gs
}

fn relabel(gs: &StarState, perm: &[usize]) -> StarState {
    let moves = gs.history().iter().map(|e| Edge::new(perm[e.u], perm[e.v]));
    StarState::from_moves(gs.n(), gs.k(), moves).unwrap()
}

proptest! {
    #[test]
    fn degree_sum_survives_adds_and_clips(v in 2usize..24, script in ops(24)) {
        let mut g = WorkGraph::empty(v);
        for op in script {
            // Out-of-range or illegal operations must be rejected without damage.
            let _ = match op {
                Op::Add(a, b) if a < v && b < v => g.add_edge(a, b),
                Op::Clip(a, b) if a < v && b < v => g.clip_pair(a, b),
                _ => Ok(()),
            };
            prop_assert!(g.degree_sum_holds());
            prop_assert_eq!(g.edges().count(), g.edge_count());
        }
    }

    #[test]
    fn clip_removes_exactly_the_pair(seed in any::<u64>(), v in 4usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_fg_sparse(v, &mut rng, seed % 2 == 0, &SparseProfile::STANDARD);
        if let Some((a, b)) = g.first_legal_clip() {
            let lost = g.degree_unchecked(a) + g.degree_unchecked(b);
            let mut h = g.clone();
            h.clip_pair(a, b).unwrap();
            prop_assert_eq!(h.active_count(), g.active_count() - 2);
            prop_assert_eq!(h.edge_count() + lost, g.edge_count());
            prop_assert!(!h.is_active(a) && !h.is_active(b));
        }
    }

    #[test]
    fn star_state_counts_and_gamma_bound(n in 2usize..12, k in 1usize..4, seed in any::<u64>()) {
        let gs = playout(n, k, usize::MAX, seed);
        let mut replay = StarState::new(n, k).unwrap();
        for (i, &e) in gs.history().iter().enumerate() {
            let mover = replay.to_move();
            replay.apply_move(e).unwrap();
            prop_assert_eq!(replay.claimed_count() + replay.unclaimed_count(), replay.total_edges());
            prop_assert_eq!(replay.owner(e), Some(mover));
            prop_assert_eq!(
                replay.edge_count(PlayerId::First) + replay.edge_count(PlayerId::Second),
                i + 1
            );
            if replay.is_ongoing() {
                prop_assert!(replay.max_degree(PlayerId::First) <= k);
                prop_assert!(replay.max_degree(PlayerId::Second) <= k);
                prop_assert!(replay.gamma_max_degree() <= 2 * k);
            }
        }
        if let Status::Lost { player, .. } = gs.status() {
            prop_assert!(gs.max_degree(player) == k + 1);
            prop_assert!(n >= 2);
        }
    }

    #[test]
    fn edge_and_outcome_serde_round_trip(a in 0usize..500, b in 0usize..500, which in 0usize..3) {
        prop_assume!(a != b);
        let e = Edge::new(a, b);
        let back: Edge = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        prop_assert_eq!(back, e);
        prop_assert_eq!(e.to_string().parse::<Edge>().unwrap(), e);
        let o = [Outcome::FirstWin, Outcome::SecondWin, Outcome::Draw][which];
        let back: Outcome = serde_json::from_str(&serde_json::to_string(&o).unwrap()).unwrap();
        prop_assert_eq!(back, o);
        let m = PiMove::add(a, b);
        let back: PiMove = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn transcripts_round_trip(n in 8usize..40, seed in any::<u64>()) {
        let cfg = RunConfig::simulate(n, 1, 1, seed, "safe-random");
        let t = run_game(&cfg, &AdversaryPolicy::new(PolicyKind::SafeRandom, seed)).unwrap();
        let back: Transcript = serde_json::from_str(&t.to_json_line()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn pcg_rule_wins_from_random_sparse_starts(v in 10usize..41, seed in any::<u64>(), attack in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = random_fg_sparse(v, &mut rng, attack, &SparseProfile::STANDARD);
        let mut policy = if attack { PcgPolicy::attacker(seed) } else { PcgPolicy::random(seed) };
        let t = play_pcg(start, &mut policy).unwrap();
        prop_assert!(t.won);
        prop_assert!(t.violations.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn canonical_key_ignores_relabelling(n in 3usize..9, k in 1usize..3, plies in 0usize..20, seed in any::<u64>()) {
        let mut gs = playout(n, k, plies, seed);
        if !gs.is_ongoing() {
            let h = gs.history();
            gs = StarState::from_moves(n, k, h[..h.len() - 1].iter().copied()).unwrap();
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        let other = relabel(&gs, &perm);
        let (p, q) = (Position::from_star(&gs).unwrap(), Position::from_star(&other).unwrap());
        for mode in [CanonMode::FullPermutation, CanonMode::RefinementHash] {
            prop_assert_eq!(canonicalize(&p, mode).unwrap(), canonicalize(&q, mode).unwrap());
        }
        prop_assert!(isomorphic(&p, &q));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn strategy_only_claims_safe_edges(seed in any::<u64>(), kind in 0usize..4) {
        let name = ["random", "safe-random", "s-attacker", "degree-attacker"][kind];
        let cfg = RunConfig::simulate(200, 1, 1, seed, name);
        let policy: AdversaryPolicy = format!("{name}:{seed}").parse().unwrap();
        let t = run_game(&cfg, &policy).unwrap();
        prop_assert_eq!(t.outcome, Outcome::SecondWin);
        let mut gs = StarState::new(200, 1).unwrap();
        for m in &t.moves {
            if m.player == PlayerId::Second {
                prop_assert!(gs.is_safe_for(PlayerId::Second, m.edge), "unsafe {}", m.edge);
            }
            gs.apply_move(m.edge).unwrap();
        }
    }
}
