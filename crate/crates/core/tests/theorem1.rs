use lof::automata::hand_coded_task_fsas;
use lof::gridworld::EnvironmentMdp;
use lof::options::{train_all_options, OptionTrainConfig};
use lof::planner::{hmdp_value_iteration, logical_value_iteration, PlannerConfig};

#[test]
fn lvi_matches_flat_optimum_on_delivery_map() {
    let env = EnvironmentMdp::from_text(include_str!("../data/delivery.txt")).unwrap();
    let opts = train_all_options(&env, None, &OptionTrainConfig::default()).unwrap();
    let s0 = env.start_cell().unwrap();
    for (task, fsa) in hand_coded_task_fsas() {
        for mask in [0, 1] {
            let mp =
                logical_value_iteration(&fsa, &opts, &env, &PlannerConfig::fixed(mask)).unwrap();
            let h = hmdp_value_iteration(&fsa, &env, mask, 1e-9).unwrap();
            let (a, b) = (mp.value(fsa.initial, 0, s0), h.value(fsa.initial, 0, s0));
            eprintln!(
                "{task} can={mask}: lvi {a} hmdp {b} sweeps {} / {}",
                mp.sweeps, h.sweeps
            );
            assert!((a - b).abs() <= 1e-9, "{task} can={mask}: {a} vs {b}");
        }
    }
}
