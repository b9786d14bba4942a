//! Derived contraction constants against 50-digit reference values.

use std::sync::Arc;

use expochar::contraction::{
    self, default_grid, derive_params, iterate_to_fixed_point, test_envelope, verify_contraction, GridFunction,
    RATIO_TOL,
};
use serde_json::Value;

fn fixture() -> Vec<Value> {
    let text = include_str!("fixtures/contraction_oracle.json");
    serde_json::from_str(text).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

#[test]
fn closed_forms_match_reference() {
    let rows = fixture();
    assert_eq!(rows.len(), 100);
    for r in &rows {
        let f = |k: &str| r[k].as_f64().unwrap();
        let c = derive_params(f("p"), f("a"), f("b")).unwrap();
        assert_eq!(c.k as u64, r["k"].as_u64().unwrap(), "{r}");
        for (got, key) in [
            (c.c, "c"),
            (c.a_ratio, "A"),
            (c.b_ratio, "B"),
            (c.v, "V"),
            (c.gamma, "gamma"),
        ] {
            assert!(rel(got, f(key)) < 1e-13, "{key}: {got} vs {}", f(key));
        }
        // ρ goes through k-th powers; allow a few ulps per factor.
        assert!(rel(c.rho, f("rho")) < 1e-11 * c.k as f64, "rho {} vs {}", c.rho, f("rho"));
        assert!(c.rho < 1.0);
    }
}

#[test]
fn contraction_on_reference_triples() {
    let rows = fixture();
    let mut checked = 0;
    for r in rows.iter().filter(|r| r["k"].as_u64().unwrap() <= 12).take(6) {
        let f = |k: &str| r[k].as_f64().unwrap();
        let c = derive_params(f("p"), f("a"), f("b")).unwrap();
        let chk = verify_contraction(&c, 20, 5).unwrap();
        assert!(chk.max_ratio <= c.rho + RATIO_TOL, "{chk:?} for {c:?}");
        checked += 1;
    }
    assert!(checked >= 3);
}

#[test]
fn decay_is_geometric_at_rate_rho() {
    let c = derive_params(0.3, 0.15, 0.9).unwrap();
    let grid = Arc::new(default_grid());
    let k = c.k as i32;
    let z0 = GridFunction::sample(grid, test_envelope(&c), |s| s.powi(k + 1) / (1.0 + s).powi(k + 3)).unwrap();
    let norms = iterate_to_fixed_point(&z0, &c, 8).unwrap();
    for (n, d) in norms.iter().enumerate() {
        assert!(*d <= c.rho.powi(n as i32) * norms[0] * (1.0 + 1e-3), "step {n}: {d}");
    }
}

#[test]
fn sweep_finds_rho_below_one() {
    let triples = contraction::random_triples(100, 77);
    let s = contraction::sweep(&triples).unwrap();
    assert_eq!(s.triples, 100);
    assert!(s.max_rho < 1.0 && s.min_rho > 0.0);
    assert!(s.min_k >= 3);
}
