use std::fmt::Write as _;

use pdcert_core::problems::GENERATORS;
use pdcert_core::solvers::Algorithm;

use crate::Check;

/// Check names with a one-line description each.
pub const CHECKS: [(Check, &str); 5] = [
    (Check::Inclusion, "generic-inclusion residual ‖P(zᵏ − zᵏ⁺¹) − F(zᵏ⁺¹)‖∞ ≤ 1e-9 at every step"),
    (Check::PerIterate, "per-iterate gap inequality against the reference saddle point"),
    (Check::Ergodic, "gap(z̄ᵏ, z_ref) ≤ ‖z_ref − z⁰‖²_P/(2k) for every k"),
    (Check::Assumption, "linearization inequality at every iterate and P − E ⪰ 0"),
    (Check::Inexact, "perturbed bound ‖z_ref − z⁰‖²_P/(2k) + D·Σ‖εⁱ‖/k (needs --error-scale)"),
];

pub fn cmd_list() -> String {
    let mut s = String::new();
    s.push_str("algorithms:\n");
    for a in Algorithm::ALL {
        let _ = writeln!(s, "  {:<18} {}", a.name(), a.description());
    }
    s.push_str("generators (builtin:NAME):\n");
    for (name, doc) in GENERATORS {
        let _ = writeln!(s, "  {name:<18} {doc}");
    }
    s.push_str("checks:\n");
    for (c, doc) in CHECKS {
        let _ = writeln!(s, "  {:<18} {doc}", c.name());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn section(text: &str, head: &str) -> usize {
        text.split(head)
            .nth(1)
            .unwrap()
            .lines()
            .skip(1)
            .take_while(|l| l.starts_with("  "))
            .count()
    }

    #[test]
    fn counts() {
        let t = cmd_list();
        assert_eq!(section(&t, "algorithms:"), 5);
        assert_eq!(section(&t, "generators"), 4);
        assert_eq!(section(&t, "checks:"), 5);
        assert!(t.lines().any(|l| l.trim_start().starts_with("admm ") && l.contains("admm layout (y,x,λ)")));
    }
}
