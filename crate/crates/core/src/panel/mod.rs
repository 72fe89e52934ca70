//! Entity × year × variable panels with an explicit presence mask.

mod clean;
mod io;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

pub use clean::{clean_panel, split_by_group, CleanReport};
pub use io::{
    load_groups, load_panel, read_groups, read_groups_column, read_panel, save_panel, write_groups, write_panel, LoadedPanel,
    PanelLayout,
};

/// World Bank income classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IncomeGroup {
    HighIncome,
    UpperMiddle,
    LowerMiddle,
    LowIncome,
}

impl IncomeGroup {
    pub const ALL: [IncomeGroup; 4] = [
        IncomeGroup::HighIncome,
        IncomeGroup::UpperMiddle,
        IncomeGroup::LowerMiddle,
        IncomeGroup::LowIncome,
    ];

    pub fn short(&self) -> &'static str {
        match self {
            IncomeGroup::HighIncome => "HIC",
            IncomeGroup::UpperMiddle => "UMIC",
            IncomeGroup::LowerMiddle => "LMIC",
            IncomeGroup::LowIncome => "LIC",
        }
    }
}

impl fmt::Display for IncomeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for IncomeGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "hic" | "high" | "highincome" => Ok(IncomeGroup::HighIncome),
            "umic" | "uppermiddle" | "uppermiddleincome" => Ok(IncomeGroup::UpperMiddle),
            "lmic" | "lowermiddle" | "lowermiddleincome" => Ok(IncomeGroup::LowerMiddle),
            "lic" | "low" | "lowincome" => Ok(IncomeGroup::LowIncome),
            _ => Err(Error::InvalidPanel(format!("unknown income group label `{s}`"))),
        }
    }
}

/// Balanced grid of observations; absent cells are tracked by a mask,
/// never by a sentinel value.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel<T: Scalar> {
    entities: Vec<String>,
    years: Vec<i32>,
    variables: Vec<String>,
    values: Vec<T>,
    present: Vec<bool>,
    groups: BTreeMap<String, IncomeGroup>,
}

impl<T: Scalar> Panel<T> {
    /// Builds a panel from row-major `[entity][year][variable]` cells.
    pub fn new(
        entities: Vec<String>,
        years: Vec<i32>,
        variables: Vec<String>,
        cells: Vec<Option<T>>,
    ) -> Result<Self> {
        let expected = entities.len() * years.len() * variables.len();
        if cells.len() != expected {
            return Err(Error::InvalidPanel(format!(
                "expected {expected} cells, got {}",
                cells.len()
            )));
        }
        if years.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::InvalidPanel(
                "years must be strictly increasing with unit step".into(),
            ));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = entities.iter().find(|e| !seen.insert(e.as_str())) {
            return Err(Error::InvalidPanel(format!("duplicate entity `{dup}`")));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = variables.iter().find(|v| !seen.insert(v.as_str())) {
            return Err(Error::InvalidPanel(format!("duplicate variable `{dup}`")));
        }
        let present: Vec<bool> = cells.iter().map(|c| c.is_some()).collect();
        let values = cells.into_iter().map(|c| c.unwrap_or_else(T::zero)).collect();
        Ok(Panel {
            entities,
            years,
            variables,
            values,
            present,
            groups: BTreeMap::new(),
        })
    }

    pub fn from_fn(
        entities: Vec<String>,
        years: Vec<i32>,
        variables: Vec<String>,
        mut f: impl FnMut(usize, usize, usize) -> Option<T>,
    ) -> Result<Self> {
        let (n, t, k) = (entities.len(), years.len(), variables.len());
        let mut cells = Vec::with_capacity(n * t * k);
        for i in 0..n {
            for y in 0..t {
                for v in 0..k {
                    cells.push(f(i, y, v));
                }
            }
        }
        Self::new(entities, years, variables, cells)
    }

    /// Attaches an income-group map; entities absent from the panel are ignored.
    pub fn with_groups(mut self, groups: BTreeMap<String, IncomeGroup>) -> Self {
        let known: HashSet<&str> = self.entities.iter().map(String::as_str).collect();
        self.groups = groups
            .into_iter()
            .filter(|(e, _)| known.contains(e.as_str()))
            .collect();
        self
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn groups(&self) -> &BTreeMap<String, IncomeGroup> {
        &self.groups
    }

    pub fn group_of(&self, entity: &str) -> Option<IncomeGroup> {
        self.groups.get(entity).copied()
    }

    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn n_years(&self) -> usize {
        self.years.len()
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_entities(), self.n_years(), self.n_vars())
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn entity_index(&self, name: &str) -> Option<usize> {
        self.entities.iter().position(|e| e == name)
    }

    #[inline]
    fn idx(&self, entity: usize, year: usize, var: usize) -> usize {
        (entity * self.years.len() + year) * self.variables.len() + var
    }

    #[inline]
    pub fn get(&self, entity: usize, year: usize, var: usize) -> Option<T> {
        let i = self.idx(entity, year, var);
        self.present[i].then(|| self.values[i])
    }

    pub fn is_present(&self, entity: usize, year: usize, var: usize) -> bool {
        self.present[self.idx(entity, year, var)]
    }

    /// Time series of one variable for one entity.
    pub fn series(&self, entity: usize, var: usize) -> Vec<Option<T>> {
        (0..self.n_years()).map(|y| self.get(entity, y, var)).collect()
    }

    pub fn missing_count(&self) -> usize {
        self.present.iter().filter(|p| !**p).count()
    }

    pub fn entity_missing_fraction(&self, entity: usize) -> f64 {
        let per = self.n_years() * self.n_vars();
        if per == 0 {
            return 0.0;
        }
        let start = self.idx(entity, 0, 0);
        let missing = self.present[start..start + per].iter().filter(|p| !**p).count();
        missing as f64 / per as f64
    }

    /// Entity-year rows with every variable present.
    pub fn complete_rows(&self) -> usize {
        (0..self.n_entities())
            .map(|i| {
                (0..self.n_years())
                    .filter(|&y| (0..self.n_vars()).all(|v| self.is_present(i, y, v)))
                    .count()
            })
            .sum()
    }

    /// Entity-year rows of the grid (N × T).
    pub fn grid_rows(&self) -> usize {
        self.n_entities() * self.n_years()
    }

    /// Subpanel over the given entity indices, in the given order.
    ///
    /// Repeated indices are allowed; repeats receive a `#<n>` suffix so that
    /// entity identifiers stay unique.
    pub fn select_entities(&self, indices: &[usize]) -> Self {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        let mut entities = Vec::with_capacity(indices.len());
        let mut groups = BTreeMap::new();
        for &i in indices {
            let c = counts.entry(i).or_insert(0);
            let name = if *c == 0 {
                self.entities[i].clone()
            } else {
                format!("{}#{}", self.entities[i], c)
            };
            *c += 1;
            if let Some(g) = self.groups.get(&self.entities[i]) {
                groups.insert(name.clone(), *g);
            }
            entities.push(name);
        }
        let (t, k) = (self.n_years(), self.n_vars());
        let mut values = Vec::with_capacity(indices.len() * t * k);
        let mut present = Vec::with_capacity(indices.len() * t * k);
        for &i in indices {
            let s = self.idx(i, 0, 0);
            values.extend_from_slice(&self.values[s..s + t * k]);
            present.extend_from_slice(&self.present[s..s + t * k]);
        }
        Panel {
            entities,
            years: self.years.clone(),
            variables: self.variables.clone(),
            values,
            present,
            groups,
        }
    }

    /// Subpanel over named variables, in the order given.
    pub fn select_variables(&self, names: &[&str]) -> Result<Self> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.variable_index(n)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown variable `{n}`")))
            })
            .collect::<Result<_>>()?;
        let vars = idx.iter().map(|&v| self.variables[v].clone()).collect();
        let out = Panel::from_fn(self.entities.clone(), self.years.clone(), vars, |i, y, v| {
            self.get(i, y, idx[v])
        })?;
        Ok(out.with_groups(self.groups.clone()))
    }

    /// Subpanel restricted to years in `[first, last]`.
    pub fn select_years(&self, first: i32, last: i32) -> Result<Self> {
        let keep: Vec<usize> = (0..self.n_years())
            .filter(|&y| self.years[y] >= first && self.years[y] <= last)
            .collect();
        if keep.is_empty() {
            return Err(Error::InsufficientData(format!(
                "no years within [{first}, {last}]"
            )));
        }
        let years = keep.iter().map(|&y| self.years[y]).collect();
        let out = Panel::from_fn(self.entities.clone(), years, self.variables.clone(), |i, y, v| {
            self.get(i, keep[y], v)
        })?;
        Ok(out.with_groups(self.groups.clone()))
    }

    /// Converts the scalar type cell by cell.
    pub fn cast<U: Scalar>(&self) -> Panel<U> {
        Panel {
            entities: self.entities.clone(),
            years: self.years.clone(),
            variables: self.variables.clone(),
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
            present: self.present.clone(),
            groups: self.groups.clone(),
        }
    }

    /// Applies `f` to every (entity, variable) series, keeping the year grid.
    pub(crate) fn map_series(
        &self,
        mut f: impl FnMut(usize, usize, &[Option<T>]) -> Vec<Option<T>>,
    ) -> Self {
        let mut out = self.clone();
        for i in 0..self.n_entities() {
            for v in 0..self.n_vars() {
                let s = self.series(i, v);
                let mapped = f(i, v, &s);
                debug_assert_eq!(mapped.len(), s.len());
                for (y, cell) in mapped.into_iter().enumerate() {
                    let ix = out.idx(i, y, v);
                    out.present[ix] = cell.is_some();
                    out.values[ix] = cell.unwrap_or_else(T::zero);
                }
            }
        }
        out
    }

    /// Independently permutes whole entity series of each variable.
    ///
    /// `perms[v][i]` is the source entity whose series of variable `v` is
    /// placed at entity `i`.
    pub fn permute_series(&self, perms: &[Vec<usize>]) -> Result<Self> {
        if perms.len() != self.n_vars() || perms.iter().any(|p| p.len() != self.n_entities()) {
            return Err(Error::InvalidParameter(
                "one entity permutation per variable required".into(),
            ));
        }
        let out = Panel::from_fn(
            self.entities.clone(),
            self.years.clone(),
            self.variables.clone(),
            |i, y, v| self.get(perms[v][i], y, v),
        )?;
        Ok(out.with_groups(self.groups.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny() -> Panel<f64> {
        Panel::from_fn(
            vec!["a".into(), "b".into()],
            vec![2000, 2001, 2002],
            vec!["x".into(), "y".into()],
            |i, y, v| Some((i * 100 + y * 10 + v) as f64),
        )
        .unwrap()
    }

    #[test]
    fn rejects_gapped_years_and_duplicates() {
        let r = Panel::<f64>::new(vec!["a".into()], vec![2000, 2002], vec!["x".into()], vec![None, None]);
        assert!(r.is_err());
        let r = Panel::<f64>::new(
            vec!["a".into(), "a".into()],
            vec![2000],
            vec!["x".into()],
            vec![None, None],
        );
        assert!(r.is_err());
        let r = Panel::<f64>::new(vec!["a".into()], vec![2000], vec!["x".into()], vec![]);
        assert!(r.is_err());
    }

    #[test]
    fn indexing_and_selection() {
        let p = tiny();
        assert_eq!(p.dims(), (2, 3, 2));
        assert_eq!(p.get(1, 2, 1), Some(121.0));
        let s = p.select_entities(&[1, 1, 0]);
        assert_eq!(s.entities(), &["b", "b#1", "a"]);
        assert_eq!(s.get(1, 0, 0), Some(100.0));
        let v = p.select_variables(&["y"]).unwrap();
        assert_eq!(v.dims(), (2, 3, 1));
        assert_eq!(v.get(0, 1, 0), Some(11.0));
        let yrs = p.select_years(2001, 2002).unwrap();
        assert_eq!(yrs.years(), &[2001, 2002]);
        assert_eq!(yrs.get(0, 0, 0), Some(10.0));
    }

    #[test]
    fn income_group_labels() {
        assert_eq!("High income".parse::<IncomeGroup>().unwrap(), IncomeGroup::HighIncome);
        assert_eq!("Upper-middle income".parse::<IncomeGroup>().unwrap(), IncomeGroup::UpperMiddle);
        assert_eq!("LMIC".parse::<IncomeGroup>().unwrap(), IncomeGroup::LowerMiddle);
        assert_eq!("LowIncome".parse::<IncomeGroup>().unwrap(), IncomeGroup::LowIncome);
        assert!("middle".parse::<IncomeGroup>().is_err());
    }

    #[test]
    fn permutation_preserves_column_multisets() {
        let p = tiny();
        let q = p.permute_series(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(q.get(0, 0, 0), Some(100.0));
        assert_eq!(q.get(0, 0, 1), Some(1.0));
    }
}
