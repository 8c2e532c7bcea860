//! Residual checks: decide whether a tensor identity holds.
//!
//! Every check runs in two stages. The symbolic stage asks the normal form
//! whether each component is identically zero; when that succeeds the
//! verdict needs no sampling at all. Otherwise the residual is evaluated on
//! a deterministic sample plan and compared against a tolerance relative to
//! the magnitude of caller-supplied reference tensors (the terms the
//! identity is made of), floored at 1 so residuals of genuinely small
//! quantities are not excused.
//!
//! Sample points where any involved expression fails to evaluate (a pole of
//! the metric, a zero determinant) are skipped with a warning instead of
//! failing the check; the verdict is `Indeterminate` only when no point
//! survives. Warnings are findings for the report, never exit conditions.

use std::fmt;

use crate::expr::provably_zero;
use crate::sample::{EvalMode, SamplePlan};
use crate::tensor::TensorField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Every component is zero in the expression normal form.
    ZeroSymbolic,
    /// Residual stayed within tolerance at every evaluated sample point.
    ZeroNumeric,
    /// Residual exceeded tolerance somewhere; see the witness.
    Nonzero,
    /// No sample point could be evaluated.
    Indeterminate,
}

impl Verdict {
    pub fn is_zero(self) -> bool {
        matches!(self, Verdict::ZeroSymbolic | Verdict::ZeroNumeric)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::ZeroSymbolic => "zero (symbolic)",
            Verdict::ZeroNumeric => "zero (numeric)",
            Verdict::Nonzero => "nonzero",
            Verdict::Indeterminate => "indeterminate",
        };
        f.write_str(s)
    }
}

/// Largest residual component seen, with where it happened.
#[derive(Debug, Clone)]
pub struct Witness {
    pub point_index: usize,
    pub component: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub name: String,
    pub verdict: Verdict,
    pub mode: EvalMode,
    /// Largest |component| over all evaluated points; 0 for symbolic zeros.
    pub max_abs: f64,
    /// Reference magnitude the tolerance is relative to, at least 1.
    pub scale: f64,
    pub tol: f64,
    pub points_used: usize,
    pub points_skipped: usize,
    /// True when every evaluation stayed in exact arithmetic.
    pub all_exact: bool,
    pub witness: Option<Witness>,
    pub warnings: Vec<String>,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.verdict.is_zero()
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.verdict)?;
        if self.verdict != Verdict::ZeroSymbolic {
            write!(
                f,
                " (max |r| = {:.3e}, scale = {:.3e}, {} points",
                self.max_abs, self.scale, self.points_used
            )?;
            if self.points_skipped > 0 {
                write!(f, ", {} skipped", self.points_skipped)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Check that `residual` vanishes identically. `references` supply the
/// magnitudes the tolerance is measured against; pass the tensors whose
/// difference or combination the residual is.
pub fn check_field_zero(
    name: &str,
    residual: &TensorField,
    references: &[&TensorField],
    plan: &SamplePlan,
    tol: f64,
) -> ResidualReport {
    let mut report = ResidualReport {
        name: name.to_string(),
        verdict: Verdict::ZeroSymbolic,
        mode: plan.mode,
        max_abs: 0.0,
        scale: 1.0,
        tol,
        points_used: 0,
        points_skipped: 0,
        all_exact: true,
        witness: None,
        warnings: Vec::new(),
    };
    if residual.components().iter().all(provably_zero) {
        return report;
    }

    let index_list: Vec<Vec<usize>> = residual.indices().collect();
    let mut scale_raw: f64 = 0.0;
    for (pi, point) in plan.points.iter().enumerate() {
        let vals = match residual.eval(point) {
            Ok(v) => v,
            Err(e) => {
                report.points_skipped += 1;
                report.warnings.push(format!("point {pi} skipped: residual: {e}"));
                continue;
            }
        };
        let mut ref_vals = Vec::with_capacity(references.len());
        let mut skipped = false;
        for (ri, r) in references.iter().enumerate() {
            match r.eval(point) {
                Ok(v) => ref_vals.push(v),
                Err(e) => {
                    report.points_skipped += 1;
                    report
                        .warnings
                        .push(format!("point {pi} skipped: reference {ri}: {e}"));
                    skipped = true;
                    break;
                }
            }
        }
        if skipped {
            continue;
        }
        report.points_used += 1;
        for (ci, v) in vals.iter().enumerate() {
            report.all_exact &= v.is_exact();
            let mag = v.abs_f64();
            if report.witness.is_none() || mag > report.max_abs {
                report.witness = Some(Witness {
                    point_index: pi,
                    component: index_list[ci].clone(),
                    value: v.to_f64(),
                });
            }
            report.max_abs = report.max_abs.max(mag);
        }
        for rv in &ref_vals {
            for v in rv {
                report.all_exact &= v.is_exact();
                scale_raw = scale_raw.max(v.abs_f64());
            }
        }
    }

    if report.points_used == 0 {
        report.verdict = Verdict::Indeterminate;
        report
            .warnings
            .push("no evaluable sample points".to_string());
        return report;
    }
    report.scale = scale_raw.max(1.0);
    report.verdict = if report.max_abs <= tol * report.scale {
        Verdict::ZeroNumeric
    } else {
        Verdict::Nonzero
    };
    report
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::tensor::ChartManifold;

    fn chart() -> Arc<ChartManifold> {
        ChartManifold::new(vec!["x1".into(), "x2".into()]).unwrap()
    }

    fn scalar_field(m: &Arc<ChartManifold>, src: &str) -> TensorField {
        TensorField::from_components(m, 0, 0, vec![m.parse(src).unwrap()])
    }

    fn rat(n: i64) -> num_rational::BigRational {
        num_rational::BigRational::from_integer(n.into())
    }

    fn plan(mode: EvalMode) -> SamplePlan {
        SamplePlan::new(2, 12, 7, &rat(1), &rat(2), mode)
    }

    #[test]
    fn symbolic_zero_needs_no_sampling() {
        let m = chart();
        let r = scalar_field(&m, "x1*x2 - x2*x1");
        let rep = check_field_zero("commutes", &r, &[], &plan(EvalMode::Rational), 1e-9);
        assert_eq!(rep.verdict, Verdict::ZeroSymbolic);
        assert_eq!(rep.points_used, 0);
        assert!(rep.passed());
    }

    #[test]
    fn exp_relation_falls_through_to_numeric() {
        // exp(x1)*exp(x2) = exp(x1+x2) is invisible to the normal form
        let m = chart();
        let r = scalar_field(&m, "exp(x1)*exp(x2) - exp(x1 + x2)");
        let rep = check_field_zero("exp sum rule", &r, &[], &plan(EvalMode::Rational), 1e-9);
        assert_eq!(rep.verdict, Verdict::ZeroNumeric);
        assert!(rep.points_used > 0);
        assert!(!rep.all_exact);
    }

    #[test]
    fn nonzero_residual_reports_a_witness() {
        let m = chart();
        let r = scalar_field(&m, "x1 - x2");
        let rep = check_field_zero("x1 = x2", &r, &[], &plan(EvalMode::Rational), 1e-9);
        assert_eq!(rep.verdict, Verdict::Nonzero);
        let w = rep.witness.expect("witness");
        assert!(w.value.abs() > 1e-9);
        assert!(w.point_index < 12);
    }

    #[test]
    fn references_set_the_tolerance_scale() {
        let m = chart();
        // difference of two ~10^6 quantities, off by x1/10^9
        let r = scalar_field(&m, "x1/1000000000");
        let big = scalar_field(&m, "1000000*x1");
        let strict = check_field_zero("absolute", &r, &[], &plan(EvalMode::Rational), 1e-9);
        assert_eq!(strict.verdict, Verdict::Nonzero);
        let relative =
            check_field_zero("relative", &r, &[&big], &plan(EvalMode::Rational), 1e-9);
        assert_eq!(relative.verdict, Verdict::ZeroNumeric);
        assert!(relative.scale >= 1e6);
    }

    #[test]
    fn singular_points_are_skipped_with_warnings() {
        let m = chart();
        let r = scalar_field(&m, "1/x1");
        // degenerate box: every sample point has x1 = 0
        let degenerate = SamplePlan::new(2, 5, 7, &rat(0), &rat(0), EvalMode::Rational);
        let rep = check_field_zero("pole", &r, &[], &degenerate, 1e-9);
        assert_eq!(rep.verdict, Verdict::Indeterminate);
        assert_eq!(rep.points_skipped, 5);
        assert!(!rep.warnings.is_empty());
        assert!(!rep.passed());
    }

    #[test]
    fn float_mode_is_tagged() {
        let m = chart();
        let r = scalar_field(&m, "x1 - x1");
        let rep = check_field_zero("trivial", &r, &[], &plan(EvalMode::Float), 1e-9);
        assert_eq!(rep.verdict, Verdict::ZeroSymbolic);
        assert_eq!(rep.mode, EvalMode::Float);
    }
}
