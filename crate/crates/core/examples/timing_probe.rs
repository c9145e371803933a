use lspi_lab::features::{FeatureMap, FourierBasis};
use lspi_lab::lspi::{lspi_train_assembled, LstdAssembler, SolverParams};
use lspi_lab::navsim::{collect_random_walk, make_world, sample_start, step, Action, World};
use lspi_lab::policy::{greedy_index, ImprovementConfig};

fn main() {
    let world = make_world(World::U);
    let batch = collect_random_walk(&world, 20_000, 1).unwrap();
    let map = FourierBasis::new(6);
    let assembler = LstdAssembler::new(&batch, &map).unwrap();
    let params = SolverParams::default();

    for gamma in [0.9, 0.95, 0.99] {
        let result =
            lspi_train_assembled(&assembler, gamma, &ImprovementConfig::greedy(), &params)
                .unwrap();
        let w = &result.w;

        let mut rng = lspi_lab::rng::stream(123, "probe/eval");
        let mut strict = 0;
        let mut loose = 0;
        let mut crashes_total = 0;
        let mut action_hist = [0usize; 3];
        for _ in 0..200 {
            let mut pose = sample_start(&world, &mut rng).unwrap();
            let mut crashed = false;
            for _ in 0..100 {
                let q = map.q_all(w, &pose).unwrap();
                let a = Action::from_index(greedy_index(&q)).unwrap();
                action_hist[a.index()] += 1;
                let (next, r, term) = step(&world, &pose, a);
                if r < 0.0 {
                    crashed = true;
                    crashes_total += 1;
                }
                if term {
                    loose += 1;
                    if !crashed {
                        strict += 1;
                    }
                    break;
                }
                pose = next;
            }
        }
        println!(
            "gamma={gamma}: iters={} conv={} strict={}/200 goal_ignoring_crash={}/200 crashes={} actions f/l/r = {:?}",
            result.iterations, result.converged, strict, loose, crashes_total, action_hist
        );
    }
}
