//! One-step System GMM for the dynamic model
//! `R_t = ρ·R_{t−1} + βᵀx_t + c + η_i + ε_t`.
//!
//! The difference equation `ΔR_t = ρ·ΔR_{t−1} + βᵀΔx_t + Δε_t` is instrumented
//! with levels `R_{t−2}, R_{t−3}, …` (collapsed to one column per lag depth by
//! default); the level equation is instrumented with `ΔR_{t−1}`, one column
//! per period. Exogenous regressors instrument themselves (`Δx` in difference
//! rows, `x` in level rows) and the constant is instrumented by itself in the
//! level rows. Unbalanced series are handled by calendar-year lags: an
//! instrument that is not observed contributes zero.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{first_dependent_column, spd_inverse, symmetrize};
use crate::model::Panel;

use super::design::{Entity, INTERCEPT_NAME};
use super::fit::panel_r2;
use super::result::{
    gaussian_log_likelihood, matrix_rows, params_table, EstimationResult, InstrumentLayout,
};
use super::spec::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum InstrumentKey {
    /// Collapsed: lag depth only.
    DiffLag(i32),
    /// Uncollapsed: (period, lag depth).
    DiffPeriodLag(i32, i32),
    LevelPeriod(i32),
}

impl InstrumentKey {
    fn name(&self, response: &str) -> String {
        match self {
            InstrumentKey::DiffLag(l) => format!("L{l}.{response}"),
            InstrumentKey::DiffPeriodLag(t, l) => format!("L{l}.{response}@{t}"),
            InstrumentKey::LevelPeriod(t) => format!("D.L1.{response}@{t}"),
        }
    }
}

struct UnitSeries {
    entity: Entity,
    /// year → (response, regressors)
    rows: BTreeMap<i32, (Option<f64>, Option<Vec<f64>>)>,
}

impl UnitSeries {
    fn response(&self, year: i32) -> Option<f64> {
        self.rows.get(&year).and_then(|r| r.0)
    }

    fn regressors(&self, year: i32) -> Option<&Vec<f64>> {
        self.rows.get(&year).and_then(|r| r.1.as_ref())
    }
}

enum Equation {
    Difference,
    Level,
}

struct StackedRow {
    equation: Equation,
    year: i32,
    y: f64,
    x: Vec<f64>,
    gmm: Vec<(InstrumentKey, f64)>,
    exog: Vec<f64>,
}

/// Rows of the stacked system for one unit: difference rows, then level rows.
fn stacked_rows(unit: &UnitSeries, n_reg: usize, intercept: bool, collapse: bool) -> Vec<StackedRow> {
    let mut diff = Vec::new();
    let mut level = Vec::new();
    for &t in unit.rows.keys() {
        let (Some(r0), Some(r1), Some(r2)) = (unit.response(t), unit.response(t - 1), unit.response(t - 2))
        else {
            continue;
        };
        let Some(x0) = unit.regressors(t) else { continue };

        if let Some(x1) = unit.regressors(t - 1) {
            let mut x = Vec::with_capacity(n_reg + 2);
            x.push(r1 - r2);
            x.extend(x0.iter().zip(x1).map(|(a, b)| a - b));
            let mut exog: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| a - b).collect();
            if intercept {
                x.push(0.0);
                exog.push(0.0);
            }
            let gmm = unit
                .rows
                .range(..=t - 2)
                .filter_map(|(&s, row)| row.0.map(|v| (s, v)))
                .map(|(s, v)| {
                    let lag = t - s;
                    let key = if collapse {
                        InstrumentKey::DiffLag(lag)
                    } else {
                        InstrumentKey::DiffPeriodLag(t, lag)
                    };
                    (key, v)
                })
                .collect();
            diff.push(StackedRow {
                equation: Equation::Difference,
                year: t,
                y: r0 - r1,
                x,
                gmm,
                exog,
            });
        }

        let mut x = Vec::with_capacity(n_reg + 2);
        x.push(r1);
        x.extend(x0.iter().copied());
        let mut exog = x0.clone();
        if intercept {
            x.push(1.0);
            exog.push(1.0);
        }
        level.push(StackedRow {
            equation: Equation::Level,
            year: t,
            y: r0,
            x,
            gmm: vec![(InstrumentKey::LevelPeriod(t), r1 - r2)],
            exog,
        });
    }
    diff.extend(level);
    diff
}

/// One-step System GMM with cluster-robust (by entity) standard errors.
///
/// Entities are (country, sector) series with at least three observed periods
/// of the response; shorter series are skipped.
pub fn system_gmm(panel: &Panel, spec: &ModelSpec) -> Result<EstimationResult> {
    if !spec.lag_dependent {
        return Err(Error::InvalidParameter(
            "System GMM estimates the dynamic model; set lag_dependent".into(),
        ));
    }
    spec.validate(panel)?;
    let resp = panel.require_variable(&spec.response)?;
    let regs = spec.regressors();
    let reg_idx: Vec<usize> = regs
        .iter()
        .map(|r| panel.require_variable(r))
        .collect::<Result<_>>()?;

    let mut units = Vec::new();
    for (entity, rows) in panel.series() {
        let mut series = BTreeMap::new();
        for &r in &rows {
            let obs = &panel.observations()[r];
            let x: Option<Vec<f64>> = reg_idx.iter().map(|&j| obs.values[j]).collect();
            series.insert(obs.year, (obs.values[resp], x));
        }
        let unit = UnitSeries { entity, rows: series };
        if unit.rows.values().filter(|r| r.0.is_some()).count() >= 3 {
            units.push(unit);
        }
    }
    if units.is_empty() {
        return Err(Error::TooFewPeriods(
            "no entity has three or more observed periods".into(),
        ));
    }

    let n_reg = regs.len();
    let stacked: Vec<(Entity, Vec<StackedRow>)> = units
        .iter()
        .map(|u| (u.entity, stacked_rows(u, n_reg, spec.intercept, spec.collapse_instruments)))
        .filter(|(_, rows)| rows.iter().any(|r| matches!(r.equation, Equation::Level)))
        .collect();
    if stacked.is_empty() {
        return Err(Error::TooFewPeriods(
            "no entity has three consecutive observed periods".into(),
        ));
    }

    let mut keys: Vec<InstrumentKey> = stacked
        .iter()
        .flat_map(|(_, rows)| rows.iter().flat_map(|r| r.gmm.iter().map(|(k, _)| *k)))
        .collect();
    keys.sort();
    keys.dedup();
    let col_of: BTreeMap<InstrumentKey, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let n_exog = n_reg + usize::from(spec.intercept);
    let n_gmm = keys.len();
    let n_inst = n_gmm + n_exog;
    let layout = InstrumentLayout {
        difference_gmm: keys
            .iter()
            .filter(|k| !matches!(k, InstrumentKey::LevelPeriod(_)))
            .count(),
        level_gmm: keys
            .iter()
            .filter(|k| matches!(k, InstrumentKey::LevelPeriod(_)))
            .count(),
        exogenous: n_exog,
    };
    let mut inst_names: Vec<String> = keys.iter().map(|k| k.name(&spec.response)).collect();
    inst_names.extend(regs.iter().cloned());
    if spec.intercept {
        inst_names.push(INTERCEPT_NAME.to_string());
    }

    let mut names = vec![format!("L1.{}", spec.response)];
    names.extend(regs.iter().cloned());
    if spec.intercept {
        names.push(INTERCEPT_NAME.to_string());
    }
    let k = names.len();

    struct UnitBlock {
        entity: Entity,
        z: DMatrix<f64>,
        x: DMatrix<f64>,
        y: DVector<f64>,
        h: DMatrix<f64>,
        level_rows: Vec<usize>,
    }
    let blocks: Vec<UnitBlock> = stacked
        .iter()
        .map(|(entity, rows)| {
            let m = rows.len();
            let mut z = DMatrix::zeros(m, n_inst);
            let mut x = DMatrix::zeros(m, k);
            let mut y = DVector::zeros(m);
            let mut h = DMatrix::zeros(m, m);
            let mut level_rows = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                for (key, v) in &row.gmm {
                    z[(i, col_of[key])] = *v;
                }
                for (j, v) in row.exog.iter().enumerate() {
                    z[(i, n_gmm + j)] = *v;
                }
                for (j, v) in row.x.iter().enumerate() {
                    x[(i, j)] = *v;
                }
                y[i] = row.y;
                match row.equation {
                    Equation::Difference => {
                        h[(i, i)] = 2.0;
                        if i > 0
                            && matches!(rows[i - 1].equation, Equation::Difference)
                            && rows[i - 1].year + 1 == row.year
                        {
                            h[(i, i - 1)] = -1.0;
                            h[(i - 1, i)] = -1.0;
                        }
                    }
                    Equation::Level => {
                        h[(i, i)] = 1.0;
                        level_rows.push(i);
                    }
                }
            }
            UnitBlock {
                entity: *entity,
                z,
                x,
                y,
                h,
                level_rows,
            }
        })
        .collect();

    let mut a = DMatrix::zeros(n_inst, n_inst);
    let mut szx = DMatrix::zeros(n_inst, k);
    let mut szy = DVector::zeros(n_inst);
    for b in &blocks {
        let zt = b.z.transpose();
        a += &zt * &b.h * &b.z;
        szx += &zt * &b.x;
        szy += &zt * &b.y;
    }
    let weight = spd_inverse(&symmetrize(a)).ok_or_else(|| {
        let rows: Vec<_> = blocks.iter().flat_map(|b| b.z.row_iter().map(|r| r.clone_owned())).collect();
        let col = first_dependent_column(&DMatrix::from_rows(&rows)).unwrap_or(0);
        Error::RankDeficient {
            column: format!("instrument {}", inst_names[col]),
        }
    })?;
    if let Some(j) = first_dependent_column(&szx) {
        return Err(Error::RankDeficient {
            column: names[j].clone(),
        });
    }
    let bread_inv = szx.transpose() * &weight * &szx;
    let bread = spd_inverse(&bread_inv).ok_or_else(|| Error::RankDeficient {
        column: names[0].clone(),
    })?;
    let beta = &bread * szx.transpose() * &weight * &szy;

    let g = blocks.len();
    let mut meat = DMatrix::zeros(n_inst, n_inst);
    let mut level_y = Vec::new();
    let mut level_x = Vec::new();
    let mut level_entities = Vec::new();
    for b in &blocks {
        let u = &b.y - &b.x * &beta;
        let s = b.z.transpose() * &u;
        meat += &s * s.transpose();
        for &i in &b.level_rows {
            level_y.push(b.y[i]);
            level_x.push(b.x.row(i).clone_owned());
            level_entities.push(b.entity);
        }
    }
    let outer = &bread * szx.transpose() * &weight;
    let gf = g as f64;
    let cov = symmetrize(&outer * meat * outer.transpose() * (gf / (gf - 1.0).max(1.0)));

    let n = level_y.len();
    if n <= k {
        return Err(Error::InsufficientRows {
            available: n,
            required: k + 1,
        });
    }
    let df = (n - k) as f64;
    let y_lvl = DVector::from_vec(level_y);
    let x_lvl = DMatrix::from_rows(&level_x);
    let n_slopes = k - usize::from(spec.intercept);
    let slopes = beta.rows(0, n_slopes).into_owned();
    let intercept = if spec.intercept { beta[k - 1] } else { 0.0 };
    let xs = x_lvl.columns(0, n_slopes).into_owned();
    let fit = panel_r2(&y_lvl, &xs, &slopes, intercept, &level_entities);
    let ssr = (&y_lvl - &x_lvl * &beta).norm_squared();

    let mut warnings = Vec::new();
    if layout.total() > g {
        let w = format!(
            "instrument count {} exceeds the number of entities {g}",
            layout.total()
        );
        log::warn!("{w}");
        warnings.push(w);
    }

    Ok(EstimationResult {
        dep_variable: spec.response.clone(),
        estimator: "SystemGMM".into(),
        cov_label: "Robust".into(),
        n_obs: n,
        n_entities: g,
        df_resid: df,
        r2: fit.overall,
        r2_within: fit.within,
        r2_between: fit.between,
        r2_overall: fit.overall,
        log_likelihood: gaussian_log_likelihood(ssr, n),
        params: params_table(&names, &beta, &cov, df),
        covariance: matrix_rows(&cov),
        entity_effects: Vec::new(),
        instruments: Some(layout),
        warnings,
    })
}
