use std::collections::BTreeMap;

use log::info;
use serde::Serialize;

use super::{IncomeGroup, Panel};
use crate::error::{Error, Result};
use crate::num::Scalar;

/// Outcome of [`clean_panel`].
#[derive(Debug, Clone)]
pub struct CleanReport<T: Scalar> {
    pub panel: Panel<T>,
    pub dropped: Vec<DroppedEntity>,
    /// Interior gaps filled by linear interpolation.
    pub interpolated_cells: usize,
    /// Leading/trailing gaps left missing.
    pub edge_gap_cells: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DroppedEntity {
    pub entity: String,
    pub missing_fraction: f64,
}

fn interpolate_interior<T: Scalar>(series: &[Option<T>]) -> (Vec<Option<T>>, usize, usize) {
    let observed: Vec<usize> = (0..series.len()).filter(|&t| series[t].is_some()).collect();
    let mut out = series.to_vec();
    let (Some(&first), Some(&last)) = (observed.first(), observed.last()) else {
        return (out, 0, series.len());
    };
    let mut filled = 0;
    for w in observed.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (va, vb) = (series[a].unwrap(), series[b].unwrap());
        for t in a + 1..b {
            let frac = T::count(t - a) / T::count(b - a);
            out[t] = Some(va + (vb - va) * frac);
            filled += 1;
        }
    }
    (out, filled, first + (series.len() - 1 - last))
}

/// Drops entities whose missing fraction exceeds `max_missing_fraction`,
/// then linearly interpolates interior gaps of the survivors.
pub fn clean_panel<T: Scalar>(data: &Panel<T>, max_missing_fraction: f64) -> Result<CleanReport<T>> {
    if !(0.0..=1.0).contains(&max_missing_fraction) {
        return Err(Error::InvalidParameter(format!(
            "max_missing_fraction {max_missing_fraction} outside [0, 1]"
        )));
    }
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for i in 0..data.n_entities() {
        let frac = data.entity_missing_fraction(i);
        if frac <= max_missing_fraction {
            keep.push(i);
        } else {
            dropped.push(DroppedEntity {
                entity: data.entities()[i].clone(),
                missing_fraction: frac,
            });
        }
    }
    if keep.is_empty() {
        return Err(Error::InsufficientData(format!(
            "all {} entities exceed the missing-data threshold {max_missing_fraction}",
            data.n_entities()
        )));
    }
    if !dropped.is_empty() {
        info!("dropped {} of {} entities above missing threshold", dropped.len(), data.n_entities());
    }
    let retained = data.select_entities(&keep);
    let (mut filled, mut edge) = (0, 0);
    let panel = retained.map_series(|_, _, s| {
        let (out, f, e) = interpolate_interior(s);
        filled += f;
        edge += e;
        out
    });
    Ok(CleanReport {
        panel,
        dropped,
        interpolated_cells: filled,
        edge_gap_cells: edge,
    })
}

/// One sub-panel per income group with at least `min_entities` members.
pub fn split_by_group<T: Scalar>(
    data: &Panel<T>,
    min_entities: usize,
) -> Result<BTreeMap<IncomeGroup, Panel<T>>> {
    if data.groups().is_empty() {
        return Err(Error::InvalidParameter("panel has no income-group map".into()));
    }
    let mut members: BTreeMap<IncomeGroup, Vec<usize>> = BTreeMap::new();
    for (i, e) in data.entities().iter().enumerate() {
        if let Some(g) = data.group_of(e) {
            members.entry(g).or_default().push(i);
        }
    }
    let mut out = BTreeMap::new();
    for (g, idx) in members {
        if idx.len() >= min_entities {
            out.insert(g, data.select_entities(&idx));
        } else {
            info!("group {g} omitted: {} entities < {min_entities}", idx.len());
        }
    }
    if out.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no income group has at least {min_entities} entities"
        )));
    }
    Ok(out)
}
