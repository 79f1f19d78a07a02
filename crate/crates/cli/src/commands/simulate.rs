use resilmap::geo::write_samples_csv;
use resilmap::ingest::write_panel_csv;
use resilmap::raster::{write_csv, Raster};
use resilmap::synth::{covariate_value, gen_field, gen_panel_with_effects, FieldDgp, PanelDgp};
use resilmap::{CountryId, SectorId};
use serde::Serialize;

use super::{grid_for, Ctx};
use crate::error::{CliError, CliResult, Context};

#[derive(Debug, Serialize)]
struct EffectRow {
    country: CountryId,
    sector: SectorId,
    effect: f64,
}

#[derive(Debug, Serialize)]
struct PanelTruth<'a> {
    #[serde(flatten)]
    dgp: &'a PanelDgp,
    entity_effects: Vec<EffectRow>,
}

#[derive(Debug, Serialize)]
struct FieldTruth<'a> {
    #[serde(flatten)]
    dgp: &'a FieldDgp,
    covariates: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Truth<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    panel: Option<PanelTruth<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<FieldTruth<'a>>,
}

/// Writes panel.csv and/or samples.csv (plus one covariate grid per field
/// trend term) and truth.json.
pub fn run(ctx: &Ctx) -> CliResult<()> {
    let sim = &ctx.config.simulate;
    if sim.panel.is_none() && sim.field.is_none() {
        return Err(CliError::Config(
            "simulate needs a `simulate.panel` or `simulate.field` section".into(),
        ));
    }
    let mut out = ctx.outputs()?;
    let mut truth = Truth { panel: None, field: None };
    if let Some(dgp) = &sim.panel {
        let draw = gen_panel_with_effects(dgp).context("generating panel")?;
        out.write("panel.csv", write_panel_csv(&draw.panel))?;
        truth.panel = Some(PanelTruth {
            dgp,
            entity_effects: draw
                .effects
                .iter()
                .map(|(&(country, sector), &effect)| EffectRow { country, sector, effect })
                .collect(),
        });
    }
    if let Some(dgp) = &sim.field {
        let samples = gen_field(dgp).context("generating field")?;
        out.write("samples.csv", write_samples_csv(&samples))?;
        let names = samples.covariate_names().to_vec();
        if !names.is_empty() {
            let b = dgp.bbox;
            let spec = grid_for(&ctx.config, (b[0], b[1], b[2], b[3]))?;
            for (j, name) in names.iter().enumerate() {
                let cells = (0..spec.n_cells())
                    .map(|i| {
                        let (x, y) = spec.cell_center(i / spec.ncols, i % spec.ncols);
                        Some(covariate_value(b, j, x, y))
                    })
                    .collect();
                let grid = Raster::from_cells(spec, cells).context("covariate grid")?;
                out.write(&format!("covariate_{name}.csv"), write_csv(&grid))?;
            }
        }
        truth.field = Some(FieldTruth { dgp, covariates: names });
    }
    out.write_json("truth.json", &truth)?;
    ctx.finish(out)
}
