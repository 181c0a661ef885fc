//! End-to-end determinism check: the same config must produce byte-identical
//! CSV artifacts across repeated runs.

use std::path::Path;
use std::process::Command;

fn run(config: &Path, out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_ccmt"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .status()
        .expect("failed to launch the solver binary");
    assert!(status.success(), "solver run failed: {status}");
}

#[test]
fn criterion_11_repeated_runs_are_byte_identical() {
    let tmp = std::env::temp_dir().join(format!("ccmt-det-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();

    let config = tmp.join("run.conf");
    std::fs::write(
        &config,
        "[run]\n\
         command = convergence\n\
         nx = 64\n\
         n_tot_list = 3..10\n\
         [geometry]\n\
         family = smooth\n\
         epsilon = 0.5\n\
         [params]\n\
         kappa = 1.0\n",
    )
    .unwrap();

    let (a, b) = (tmp.join("a"), tmp.join("b"));
    run(&config, &a);
    run(&config, &b);

    let first = std::fs::read(a.join("convergence.csv")).unwrap();
    let second = std::fs::read(b.join("convergence.csv")).unwrap();
    assert!(!first.is_empty(), "empty convergence.csv");
    assert_eq!(first, second, "convergence.csv differs between runs");

    // A second command family, exercising the modal amplitude path.
    let decay_config = tmp.join("decay.conf");
    std::fs::write(
        &decay_config,
        "[run]\n\
         command = decay\n\
         nx = 64\n\
         n_tot = 20\n\
         [geometry]\n\
         family = rough\n\
         epsilon = 0.3\n",
    )
    .unwrap();
    run(&decay_config, &a);
    run(&decay_config, &b);
    let first = std::fs::read(a.join("decay.csv")).unwrap();
    let second = std::fs::read(b.join("decay.csv")).unwrap();
    assert_eq!(first, second, "decay.csv differs between runs");

    let _ = std::fs::remove_dir_all(&tmp);
    println!("criterion 11 (repeated runs produce byte-identical CSV output): PASS");
}
