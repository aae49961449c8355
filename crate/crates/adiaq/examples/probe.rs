use adiaq::diophantine::parse_polynomial;
use adiaq::verification::{decide, identify_ground_state, RunConfig};

fn main() {
    let corpus: Vec<(&str, u32)> = vec![
        ("x + y - 2", 2),
        ("x^2 + y^2 - 3", 4),
        ("x^2 + y^2 - 25", 5),
        ("(x+1)^3 + (y+1)^3 - (z+1)^3", 2),
        ("x - 3", 6),
        ("x^2 - 4", 4),
        ("x^2 - 3", 4),
        ("2*x - 5", 6),
        ("x*y - 6", 6),
        ("x + y - 9", 5),
        ("x^2 + y^2 - 2", 3),
        ("x^2 - y - 2", 3),
        ("x^2 + x + 1", 5),
        ("x + 2*y - 4", 4),
        ("x^2 - 2*y", 4),
        ("3*x - 2*y - 1", 3),
        ("x^3 - 8", 4),
        ("x^3 + y - 30", 3),
        ("x^2*y - 4", 4),
        ("x + y + 1", 3),
        ("x^4 - 16", 3),
        ("2*x + 3*y - 7", 3),
    ];
    let mut inconclusive = 0;
    for (eq, n) in &corpus {
        let cfg = RunConfig::new(parse_polynomial(eq).unwrap(), *n);
        let t0 = std::time::Instant::now();
        let report = identify_ground_state(&cfg).unwrap();
        let last = report.runs.last().unwrap();
        let tag = match &report.decision {
            adiaq::verification::Decision::HasSolution { .. } => "HAS",
            adiaq::verification::Decision::NoSolutionWithinCutoff { .. } => "NO ",
            adiaq::verification::Decision::Inconclusive { .. } => { inconclusive += 1; "INC" }
        };
        println!(
            "{tag} {:32} N={} dim={:4} dom_p(128)={:.3} [{:?}] {:.1}s",
            eq, n, report.basis_dimension, last.dominant_probability, report.decision, t0.elapsed().as_secs_f64()
        );
    }
    println!("inconclusive: {inconclusive}/{}", corpus.len());

    // extended sweep for the Pythagorean instance
    let mut cfg = RunConfig::new(parse_polynomial("x^2 + y^2 - 25").unwrap(), 5);
    cfg.t_list = RunConfig::doubling_t_list(1024.0);
    let t0 = std::time::Instant::now();
    let report = identify_ground_state(&cfg).unwrap();
    for run in &report.runs {
        println!("T={:7.1} dom_p={:.4}", run.evolution_time, run.dominant_probability);
    }
    println!("extended decision: {:?} ({:.1}s)", report.decision, t0.elapsed().as_secs_f64());
    let _ = decide(&cfg);
}
