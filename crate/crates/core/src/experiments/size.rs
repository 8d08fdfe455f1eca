use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Provenance, SweepTable};
use crate::cavity::{eta_with_scattering, maximize_eta, ScatteringModel};
use crate::error::{Result, SibaError};
use crate::numerics::logspace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EtaSizeSweep {
    pub q_list: Vec<f64>,
    pub nu: f64,
    pub eps: f64,
    pub kr_min: f64,
    pub kr_max: f64,
    pub points: usize,
}

impl Default for EtaSizeSweep {
    fn default() -> Self {
        EtaSizeSweep { q_list: vec![1e4, 1e5, 1e6], nu: 1.0, eps: 1.0, kr_min: 1e-2, kr_max: 1.0, points: 200 }
    }
}

pub const ETA_SIZE_COLUMNS: [&str; 7] = ["q", "kr", "eta", "kr_opt", "eta_max", "kr_opt_closed", "eta_max_closed"];

/// Back-action parameter with scattering losses against `kr` on a log grid,
/// one block of rows per quality factor. Every row of a block repeats the
/// numeric maximum and its closed-form prediction.
pub fn sweep_eta_vs_size(s: &EtaSizeSweep) -> Result<SweepTable> {
    if s.q_list.is_empty() {
        return Err(SibaError::validation("q_list", "need at least one quality factor"));
    }
    if !(s.kr_min > 0.0 && s.kr_max > s.kr_min) || !s.kr_max.is_finite() {
        return Err(SibaError::validation("kr", format!("need 0 < kr_min < kr_max, got [{}, {}]", s.kr_min, s.kr_max)));
    }
    if s.points < 2 {
        return Err(SibaError::validation("points", "need at least two grid points"));
    }
    let prov = Provenance::of(s, &[("q_list", s.q_list.len()), ("points", s.points)])?;
    let krs = logspace(s.kr_min, s.kr_max, s.points);
    let blocks: Vec<Vec<Vec<f64>>> = s
        .q_list
        .par_iter()
        .map(|&q| {
            let sm = ScatteringModel::new(q, s.nu, 0.0)?.with_eps(s.eps)?;
            let (kr_opt, eta_max) = maximize_eta(&sm)?;
            let (kr_c, eta_c) = sm.optimum();
            Ok(krs
                .iter()
                .map(|&kr| vec![q, kr, eta_with_scattering(&sm.with_kr(kr)), kr_opt, eta_max, kr_c, eta_c])
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut t = SweepTable::new("figS1", &ETA_SIZE_COLUMNS, prov);
    for row in blocks.into_iter().flatten() {
        t.push(row);
    }
    Ok(t)
}
