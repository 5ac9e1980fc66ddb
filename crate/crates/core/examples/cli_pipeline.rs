//! Drives the command-line front end in-process: Gaussian distribution,
//! oscillatory check and phase recovery.

fn run(args: &[&str]) -> String {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = jetphase::cli::run(std::iter::once("jetphase").chain(args.iter().copied()), &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    String::from_utf8(out).unwrap()
}

fn main() {
    let pair = r#"{"num_vars":1,"phase":{"num_vars":1,"terms":[{"nu":-1,"x":[2],"c":"1/2"},{"nu":-1,"x":[3],"c":"1"}]}}"#;
    let dist = run(&["foi", "distribution", "--pair", pair, "-N", "3"]);
    println!("distribution: {dist}");
    println!("check: {}", run(&["osc", "check", "--distribution", dist.trim(), "-N", "3"]));
    println!("recover: {}", run(&["foi", "recover", "--distribution", dist.trim(), "-N", "3"]));
}
