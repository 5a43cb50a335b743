//! Driving the verifier from a scenario description: the same sectioned text
//! format accepted by `supercurves --scenario <path>`, run in-process, with
//! the deterministic JSON report printed to stdout.
//!
//! Run with: cargo run --example scenario_report

use supercurves::cli;

const SCENARIO: &str = r#"
[base]
algebra = grassmann(1)
q = 1
n = 2

[curve]
at 0: theta1 -> z^2 * theta1

[bundle "L"]
at 0: z^2

[divisor "D"]
at 0: 1 + beta1 * theta1 / z

[run]
h0 L
h1 L
serre L
duality-verify L
degree D
abel-check D
residue-suite 10
"#;

fn main() {
    let scenario = cli::parse_scenario("demo", SCENARIO).unwrap();
    let (report, falsified) = cli::run(&scenario, 7, 1).unwrap();
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    assert!(!falsified, "every finding should be VERIFIED");
}
