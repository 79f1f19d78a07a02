use std::fmt::Write;

use super::result::EstimationResult;

const WIDTH: usize = 90;

/// Four decimals, or `d.ddde±XX` scientific notation for nonzero magnitudes below 1e-4.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v != 0.0 && v.abs() < 1e-4 {
        let s = format!("{v:.3e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent present");
        let exp: i32 = exp.parse().expect("integer exponent");
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    format!("{v:.4}")
}

/// Fixed-width summary with the header block and coefficient table of a
/// panel regression report.
pub fn format_report(result: &EstimationResult) -> String {
    let mut out = String::new();
    let title = format!("{} Estimation Summary", result.estimator);
    let _ = writeln!(out, "{}", format!("{title:^WIDTH$}").trim_end());
    let _ = writeln!(out, "{}", "=".repeat(WIDTH));
    let left = [
        ("Dep. Variable:", result.dep_variable.clone()),
        ("Estimator:", result.estimator.clone()),
        ("No. Observations:", result.n_obs.to_string()),
        ("Cov. Estimator:", result.cov_label.clone()),
        ("", String::new()),
    ];
    let right = [
        ("R-squared:", format_number(result.r2)),
        ("R-squared (Between):", format_number(result.r2_between)),
        ("R-squared (Within):", format_number(result.r2_within)),
        ("R-squared (Overall):", format_number(result.r2_overall)),
        ("Log-likelihood:", format_number(result.log_likelihood)),
    ];
    for ((ll, lv), (rl, rv)) in left.iter().zip(&right) {
        let _ = writeln!(out, "{ll:<22}{lv:>22}    {rl:<24}{rv:>18}");
    }
    let _ = writeln!(out, "{}", "=".repeat(WIDTH));
    let _ = writeln!(
        out,
        "{:<24}{:>11}{:>11}{:>11}{:>11}{:>11}{:>11}",
        "", "Parameter", "Std. Err.", "T-stat", "P-value", "Lower CI", "Upper CI"
    );
    let _ = writeln!(out, "{}", "-".repeat(WIDTH));
    for p in &result.params {
        let _ = writeln!(
            out,
            "{:<24}{:>11}{:>11}{:>11}{:>11}{:>11}{:>11}",
            p.name,
            format_number(p.coef),
            format_number(p.std_err),
            format_number(p.t_stat),
            format_number(p.p_value),
            format_number(p.ci_lower),
            format_number(p.ci_upper)
        );
    }
    let _ = writeln!(out, "{}", "=".repeat(WIDTH));
    if let Some(inst) = result.instruments {
        let _ = writeln!(
            out,
            "Instruments: {} difference-GMM, {} level-GMM, {} exogenous",
            inst.difference_gmm, inst.level_gmm, inst.exogenous
        );
    }
    for w in &result.warnings {
        let _ = writeln!(out, "Warning: {w}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::ParameterEstimate;

    #[test]
    fn number_format_rules() {
        assert_eq!(format_number(-0.0191), "-0.0191");
        assert_eq!(format_number(6.147e-05), "6.147e-05");
        assert_eq!(format_number(-4.32e-05), "-4.320e-05");
        assert_eq!(format_number(0.0), "0.0000");
        assert_eq!(format_number(124.5), "124.5000");
        assert_eq!(format_number(f64::NAN), "nan");
    }

    #[test]
    fn golden_single_coefficient_report() {
        let result = EstimationResult {
            dep_variable: "agricultural_yield".into(),
            estimator: "PanelOLS".into(),
            cov_label: "Robust".into(),
            n_obs: 124,
            n_entities: 8,
            df_resid: 120.0,
            r2: 0.034,
            r2_within: 0.034,
            r2_between: -0.2887,
            r2_overall: -0.2634,
            log_likelihood: -78.911,
            params: vec![ParameterEstimate {
                name: "temperature".into(),
                coef: -0.0191,
                std_err: 0.0157,
                t_stat: -1.2179,
                p_value: 0.2257,
                ci_lower: -0.0503,
                ci_upper: 0.0120,
            }],
            covariance: vec![vec![0.0157 * 0.0157]],
            entity_effects: Vec::new(),
            instruments: None,
            warnings: Vec::new(),
        };
        let expected = include_str!("../../tests/data/report_golden.txt");
        assert_eq!(format_report(&result), expected);
    }
}
