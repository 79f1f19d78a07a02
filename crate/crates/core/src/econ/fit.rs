//! Goodness-of-fit shared by the estimators.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::design::Entity;

pub(crate) struct PanelFit {
    pub within: f64,
    pub between: f64,
    pub overall: f64,
}

fn r2(ssr: f64, sst: f64) -> f64 {
    1.0 - ssr / sst
}

/// Within, between and overall R² of `y ≈ a + X·slopes`.
///
/// Within uses entity-demeaned data, between uses unweighted entity means,
/// overall uses the raw data. Each may be negative.
pub(crate) fn panel_r2(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    slopes: &DVector<f64>,
    intercept: f64,
    entities: &[Entity],
) -> PanelFit {
    let n = y.len();
    let k = x.ncols();
    let mut groups: BTreeMap<Entity, Vec<usize>> = BTreeMap::new();
    for (i, e) in entities.iter().enumerate() {
        groups.entry(*e).or_default().push(i);
    }

    let y_mean = y.mean();
    let fitted = x * slopes;
    let ssr_overall: f64 = (0..n).map(|i| (y[i] - intercept - fitted[i]).powi(2)).sum();
    let sst_overall: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();

    let mut ssr_within = 0.0;
    let mut sst_within = 0.0;
    let mut ybar_g = Vec::with_capacity(groups.len());
    let mut fbar_g = Vec::with_capacity(groups.len());
    for rows in groups.values() {
        let m = rows.len() as f64;
        let ybar = rows.iter().map(|&i| y[i]).sum::<f64>() / m;
        let xbar: Vec<f64> = (0..k)
            .map(|j| rows.iter().map(|&i| x[(i, j)]).sum::<f64>() / m)
            .collect();
        let fbar: f64 = (0..k).map(|j| xbar[j] * slopes[j]).sum();
        for &i in rows {
            let yd = y[i] - ybar;
            let fd = fitted[i] - fbar;
            ssr_within += (yd - fd).powi(2);
            sst_within += yd * yd;
        }
        ybar_g.push(ybar);
        fbar_g.push(fbar);
    }
    let g = ybar_g.len() as f64;
    let ybar_bar = ybar_g.iter().sum::<f64>() / g;
    let ssr_between: f64 = ybar_g
        .iter()
        .zip(&fbar_g)
        .map(|(yb, fb)| (yb - intercept - fb).powi(2))
        .sum();
    let sst_between: f64 = ybar_g.iter().map(|yb| (yb - ybar_bar).powi(2)).sum();

    PanelFit {
        within: r2(ssr_within, sst_within),
        between: r2(ssr_between, sst_between),
        overall: r2(ssr_overall, sst_overall),
    }
}
