//! JSON generator specs (schema 1) and their realization.

use serde::Deserialize;
use weylkit::{
    dense_module_signal, measure_valued_path, quasi_periodic_signal, set_valued_path, Error,
    FiniteSet, FrequencySpec, GridMask, GridSpec, Result, SampledPath, Term, VectorPoint,
};

pub fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub schema: u32,
    pub grid: GridCfg,
    pub signal: SignalCfg,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    #[serde(default)]
    pub t0: f64,
    pub h: f64,
    pub n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalCfg {
    QuasiPeriodic {
        terms: Vec<TermCfg>,
        #[serde(default)]
        seed: u64,
    },
    DenseModule {
        k: usize,
    },
    SetValued {
        base: Vec<Vec<f64>>,
        translate: Vec<TermCfg>,
        #[serde(default)]
        scale: Option<Vec<TermCfg>>,
        #[serde(default)]
        seed: u64,
    },
    MeasureValued {
        components: Vec<ComponentCfg>,
        #[serde(default)]
        seed: u64,
    },
    /// Periodic on/off mask, emitted in the mask CSV format.
    DutyMask {
        period_cells: usize,
        on_cells: usize,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermCfg {
    pub frequency: f64,
    pub amplitude: Vec<f64>,
    /// Give phases for all terms or for none; absent phases are drawn
    /// from the seed.
    pub phase: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentCfg {
    pub weight: Vec<TermCfg>,
    pub location: Vec<TermCfg>,
}

pub enum Generated {
    Path(SampledPath),
    Mask(GridMask),
}

fn freq_spec(terms: &[TermCfg], seed: u64) -> Result<FrequencySpec> {
    let with_phase = terms.iter().filter(|t| t.phase.is_some()).count();
    if with_phase == terms.len() {
        FrequencySpec::new(
            terms
                .iter()
                .map(|t| Term {
                    frequency: t.frequency,
                    amplitude: t.amplitude.clone(),
                    phase: t.phase.unwrap(),
                })
                .collect(),
            seed,
        )
    } else if with_phase == 0 {
        let pairs: Vec<(f64, Vec<f64>)> = terms
            .iter()
            .map(|t| (t.frequency, t.amplitude.clone()))
            .collect();
        FrequencySpec::seeded_phases(&pairs, seed)
    } else {
        input_err("give phases for all terms or for none")
    }
}

pub fn generate(spec: &GenSpec) -> Result<Generated> {
    if spec.schema != 1 {
        return input_err(format!("unsupported spec schema {}", spec.schema));
    }
    let grid = GridSpec { t0: spec.grid.t0, h: spec.grid.h, n: spec.grid.n };
    match &spec.signal {
        SignalCfg::QuasiPeriodic { terms, seed } => {
            Ok(Generated::Path(quasi_periodic_signal(&freq_spec(terms, *seed)?, &grid)?))
        }
        SignalCfg::DenseModule { k } => Ok(Generated::Path(dense_module_signal(*k, &grid)?)),
        SignalCfg::SetValued { base, translate, scale, seed } => {
            let points = base
                .iter()
                .map(|coords| VectorPoint::new(coords.clone()))
                .collect::<Result<Vec<_>>>()?;
            let s0 = FiniteSet::new(points)?;
            let translate = freq_spec(translate, *seed)?;
            let scale = scale
                .as_ref()
                .map(|s| freq_spec(s, seed.wrapping_add(1)))
                .transpose()?;
            Ok(Generated::Path(set_valued_path(&s0, &translate, scale.as_ref(), &grid)?))
        }
        SignalCfg::MeasureValued { components, seed } => {
            let comps = components
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let base = seed.wrapping_add(2 * i as u64);
                    Ok((
                        freq_spec(&c.weight, base)?,
                        freq_spec(&c.location, base.wrapping_add(1))?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Generated::Path(measure_valued_path(&comps, &grid)?))
        }
        SignalCfg::DutyMask { period_cells, on_cells } => {
            if *period_cells == 0 || on_cells > period_cells {
                return input_err("duty mask needs 0 < on_cells <= period_cells");
            }
            let flags: Vec<bool> = (0..grid.n).map(|i| i % period_cells < *on_cells).collect();
            Ok(Generated::Mask(GridMask::new(grid.t0, grid.h, flags)?))
        }
    }
}
