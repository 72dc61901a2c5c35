//! Acceptance gate: runs the verification suite at its default desk-scale
//! configuration and adjudicates the release criteria, printing one PASS/FAIL
//! line per criterion.

use std::process::Command;

use serde_json::Value;

use conflab::verify::{check_ids, run_suite, CheckCase, VerifyConfig};

fn find<'a>(
    cases: &'a [CheckCase],
    id: &str,
    label: &str,
    pred: impl Fn(&Value) -> bool,
) -> &'a CheckCase {
    cases
        .iter()
        .find(|c| c.check_id == id && pred(&c.params))
        .unwrap_or_else(|| panic!("no case for {id} ({label})"))
}

fn note(case: &CheckCase, key: &str) -> Value {
    case.note
        .as_ref()
        .map(|n| n[key].clone())
        .unwrap_or(Value::Null)
}

fn order_within(case: &CheckCase, lo: f64, hi: f64) -> bool {
    case.order.is_some_and(|o| (lo..=hi).contains(&o))
}

/// Runs `conflab verify` at a small ladder-only configuration and returns the
/// JSON report with the timing fields zeroed out.
fn cli_report(path: &std::path::Path) -> Value {
    let status = Command::new(env!("CARGO_BIN_EXE_conflab"))
        .args(["verify", "--rep", "ladder", "--modes", "24", "--n-max", "2"])
        .args(["--ladder-levels", "16", "--ladder-margin", "6", "--seed", "7", "--json"])
        .arg(path)
        .status()
        .expect("verify subprocess runs");
    assert_eq!(status.code(), Some(0), "cli verify run failed");
    let text = std::fs::read_to_string(path).expect("report file readable");
    let mut report: Value = serde_json::from_str(&text).expect("report parses");
    if let Some(cases) = report["cases"].as_array_mut() {
        for case in cases {
            case["runtime_ms"] = Value::from(0u64);
        }
    }
    report
}

#[test]
fn acceptance() {
    let cfg = VerifyConfig::default();
    let report = run_suite(&cfg).expect("suite runs at defaults");
    for c in &report.cases {
        println!(
            "{:40} residual {:.3e}  tol {:.3e}  order {:?}  pass {}  {:6}ms  [{}]",
            c.check_id, c.residual, c.tolerance, c.order, c.pass, c.runtime_ms, c.params
        );
    }
    // every registered check contributed at least one case
    for id in check_ids() {
        assert!(
            report.cases.iter().any(|c| c.check_id == id),
            "no case for {id}"
        );
    }

    let cases = &report.cases;
    let is_rep = |rep: &'static str| move |p: &Value| p["rep"] == rep;
    let mut results: Vec<(&str, bool)> = Vec::new();

    // 1. generator algebra closes: exact on the ladder, second-order on grids
    {
        let ladder = find(cases, "algebra_closure", "ladder", is_rep("ladder"));
        let triplet = find(cases, "algebra_closure", "triplet", |p| {
            p["modes"].is_array()
        });
        let graded = find(cases, "algebra_closure", "graded grid", |p| {
            p["rep"] == "grid" && p["modes"].is_number()
        });
        results.push((
            "commutation relations: ladder < 1e-11, grid order 2.0±0.2",
            ladder.pass
                && ladder.residual < 1e-11
                && triplet.pass
                && order_within(triplet, 1.8, 2.2)
                && graded.pass,
        ));
    }

    // 2. the generators conserve photon number on both realizations
    {
        let grid = find(cases, "number_invariance", "grid", is_rep("grid"));
        let ladder = find(cases, "number_invariance", "ladder", is_rep("ladder"));
        results.push((
            "[T_m, N] = 0 on grid and ladder sectors",
            grid.pass && ladder.pass,
        ));
    }

    // 3. vacuum nullity and flow invariance
    {
        let vac = find(cases, "vacuum_null", "grid", |_| true);
        results.push((
            "T_m|0> = 0 and flow-invariant vacuum, residual <= 1e-12",
            vac.pass && vac.residual <= 1e-12,
        ));
    }

    // 4. canonical pair [E, U] = ihbar on many seeded states
    {
        let grid = find(cases, "canonical_EU", "grid", is_rep("grid"));
        let ladder = find(cases, "canonical_EU", "ladder", is_rep("ladder"));
        let states = grid.params["states"].as_u64().unwrap_or(0);
        results.push((
            "<[E, U]> = ihbar on >= 10 states over sectors 1..=3",
            grid.pass && states >= 10 && grid.params["sectors"] == "1..=3" && ladder.pass,
        ));
    }

    // 5. sector-dependent commutator floor and its Robertson bound
    {
        let floor_g = find(cases, "omega_u_floor", "grid", is_rep("grid"));
        let floor_l = find(cases, "omega_u_floor", "ladder", is_rep("ladder"));
        let rob_g = find(cases, "robertson_floor", "grid", is_rep("grid"));
        let rob_l = find(cases, "robertson_floor", "ladder", is_rep("ladder"));
        let sectors = note(floor_g, "per_sector_residuals")
            .as_array()
            .map_or(0, Vec::len);
        results.push((
            "<[Omega, U]> = i/N for N = 1..3 and dOmega*dU >= 1/(2N)",
            floor_g.pass && sectors == 3 && floor_l.pass && rob_g.pass && rob_l.pass,
        ));
    }

    // 6. the exact C identity, hbar-covariant with a x4 quarter-term
    {
        let h1 = find(cases, "c_identity", "hbar", |p| {
            p["rep"] == "ladder" && p["hbar"] == 1.0
        });
        let h2 = find(cases, "c_identity", "2 hbar", |p| {
            p["rep"] == "ladder" && p["hbar"] == 2.0
        });
        let grid = find(cases, "c_identity", "grid", is_rep("grid"));
        results.push((
            "C = UEU + (Delta^2 + hbar^2/4) E^-1 exact on ladder, x4 at 2hbar",
            h1.pass
                && h1.residual < 1e-10
                && h2.pass
                && h2.residual < 1e-10
                && note(h2, "quarter_term_coefficient_scale") == 4.0
                && grid.pass,
        ));
    }

    // 7. centrality of Delta^2, the one-photon constant, and reported minima
    {
        let ladder = find(cases, "casimir_central", "ladder", |p| {
            p["rep"] == "ladder" && p["sectors"].is_string()
        });
        let constant = find(cases, "casimir_central", "constant", |p| {
            p["constant"].is_string()
        });
        let grid = find(cases, "casimir_central", "grid", is_rep("grid"));
        let minima_reported = !note(ladder, "informational_sector_minima").is_null()
            && !note(grid, "informational_sector_minima").is_null();
        results.push((
            "Delta^2 central (< 1e-11 ladder), one-photon -hbar^2/4 < 1e-10",
            ladder.pass
                && ladder.residual < 1e-11
                && constant.pass
                && constant.residual < 1e-10
                && grid.pass
                && minima_reported,
        ));
    }

    // 8. energy-density transport converges at order >= 1.8
    {
        let transport = find(cases, "density_transport", "grid", |_| true);
        results.push((
            "density transport under dilatation flow converges, order >= 1.8",
            transport.pass && transport.order.is_some_and(|o| o >= 1.8),
        ));
    }

    // 9. finite Doppler flows: dilatation scaling, translation shift/invariance
    {
        let dil = find(cases, "doppler_flow", "dilatation", |p| {
            p["flow"] == "dilatation"
        });
        let shift = find(cases, "doppler_flow", "shift", |p| {
            p["flow"] == "translation" && p["quantity"] == "shift of <U>"
        });
        let inv = find(cases, "doppler_flow", "invariance", |p| {
            p["flow"] == "translation" && p["quantity"] != "shift of <U>"
        });
        results.push((
            "Doppler flows: <Omega> scaling 1e-3, <U> shift 1e-6, widths 1e-9",
            dil.pass
                && dil.tolerance <= 1e-3
                && shift.pass
                && shift.tolerance <= 1e-6
                && inv.pass
                && inv.tolerance <= 1e-9,
        ));
    }

    // 10. the semiclassical 2*omega*u response of the conformal flow
    {
        let ladder = find(cases, "conformal_shift_2wu", "ladder", is_rep("ladder"));
        let grid = find(cases, "conformal_shift_2wu", "grid", is_rep("grid"));
        results.push((
            "conformal flow rate = -2<D>, |<D>| = hbar*N*omega0*|u0|",
            ladder.pass && ladder.tolerance <= 1e-6 && grid.pass,
        ));
    }

    // 11. independent oracles agree across routes and realizations
    {
        let flow = find(cases, "oracle_equivalence", "flow", |p| {
            p["flow"].is_string()
        });
        let both = find(cases, "oracle_equivalence", "both", is_rep("both"));
        results.push((
            "two-route flow < 1e-10; grid/ladder Delta^2 constants agree",
            flow.pass && flow.tolerance <= 1e-10 && both.pass,
        ));
    }

    // 12. the CLI report is deterministic apart from the timing fields
    {
        let dir = std::env::temp_dir();
        let a = cli_report(&dir.join("conflab_acceptance_a.json"));
        let b = cli_report(&dir.join("conflab_acceptance_b.json"));
        results.push((
            "repeated CLI verify runs agree byte-for-byte modulo timings",
            a == b && a["pass"] == true,
        ));
    }

    let mut all = true;
    for (i, (desc, ok)) in results.iter().enumerate() {
        println!(
            "criterion {:2}: {} — {}",
            i + 1,
            if *ok { "PASS" } else { "FAIL" },
            desc
        );
        all &= ok;
    }
    assert!(all, "acceptance criteria failed");
    assert!(report.pass, "full suite reported failure");
}
