use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discretization::{GridSpec, ParallelogramSpec, ReflectorSpec};
use crate::error::{Error, Result};
use crate::linalg::GridNode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionClass {
    Unconstrained,
    OneCharacteristic,
    Determined,
}

impl RegionClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionClass::Unconstrained => "unconstrained",
            RegionClass::OneCharacteristic => "one_characteristic",
            RegionClass::Determined => "determined",
        }
    }

    /// Number of prescribed characteristics through the node.
    pub fn code(self) -> u8 {
        match self {
            RegionClass::Unconstrained => 0,
            RegionClass::OneCharacteristic => 1,
            RegionClass::Determined => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Data nodes a characteristic must touch to count as prescribed.
    pub min_data_nodes: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { min_data_nodes: 1 }
    }
}

/// Per-node classification, indexed like the grid's unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub n_x: usize,
    pub n_t: usize,
    pub classes: Vec<RegionClass>,
}

impl RegionMap {
    pub fn get(&self, node: GridNode) -> RegionClass {
        self.classes[node.time * self.n_x + node.space]
    }

    pub fn count(&self, class: RegionClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn determined_mask(&self) -> Vec<bool> {
        self.classes.iter().map(|&c| c == RegionClass::Determined).collect()
    }

    /// `t_index,x_index,value` with the class code as value.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "t_index,x_index,value")?;
        for n in 0..self.n_t {
            for i in 0..self.n_x {
                writeln!(w, "{n},{i},{}", self.classes[n * self.n_x + i].code())?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Classifies every node of a `C = 1` wave grid by how many of its two
/// characteristic lines are fixed by the data.
///
/// With `C = 1` the stencil splits the grid solution into `F(i + n) +
/// G(i - n)`, so each diagonal line `i + n = a` or `i - n = b` carries one
/// free value. A line is prescribed when it touches at least
/// `min_data_nodes` data nodes, or when it meets the reflector wall at a node
/// whose other line is prescribed (the zero wall value ties the two).
/// Data and reflector nodes are Determined outright. The four corners lie in
/// no stencil row, so they are Unconstrained unless prescribed directly.
pub fn determined_region_oracle(
    grid: &GridSpec,
    data: &ParallelogramSpec,
    reflector: Option<&ReflectorSpec>,
    cfg: &OracleConfig,
) -> Result<RegionMap> {
    grid.validate()?;
    if !grid.is_unit_courant() {
        return Err(Error::Unsupported(format!(
            "characteristic oracle needs c*dt/dx = 1, got {}",
            grid.courant()
        )));
    }
    if cfg.min_data_nodes == 0 {
        return Err(Error::Config("oracle.min_data_nodes must be >= 1".into()));
    }
    let data_nodes = data.nodes(grid)?;
    let mut hits_a: HashMap<i64, usize> = HashMap::new();
    let mut hits_b: HashMap<i64, usize> = HashMap::new();
    for node in &data_nodes {
        let (i, n) = (node.space as i64, node.time as i64);
        *hits_a.entry(i + n).or_default() += 1;
        *hits_b.entry(i - n).or_default() += 1;
    }
    let mut lines_a: HashSet<i64> = hits_a.into_iter().filter(|&(_, c)| c >= cfg.min_data_nodes).map(|(a, _)| a).collect();
    let mut lines_b: HashSet<i64> = hits_b.into_iter().filter(|&(_, c)| c >= cfg.min_data_nodes).map(|(b, _)| b).collect();

    let mut direct: HashSet<GridNode> = data_nodes.iter().copied().collect();
    if let Some(refl) = reflector {
        crate::discretization::check_reflector(grid, &refl.range())?;
        // Wall node (0, n) lies on a-line n and b-line -n.
        loop {
            let before = lines_a.len() + lines_b.len();
            for n in refl.range() {
                let n = n as i64;
                if lines_a.contains(&n) {
                    lines_b.insert(-n);
                }
                if lines_b.contains(&-n) {
                    lines_a.insert(n);
                }
            }
            if lines_a.len() + lines_b.len() == before {
                break;
            }
        }
        direct.extend(refl.range().map(|n| GridNode::new(0, n)));
    }

    let corners = grid.corners();
    let mut classes = Vec::with_capacity(grid.n_nodes());
    for n in 0..grid.n_t {
        for i in 0..grid.n_x {
            let node = GridNode::new(i, n);
            let class = if direct.contains(&node) {
                RegionClass::Determined
            } else if corners.contains(&node) {
                RegionClass::Unconstrained
            } else {
                let (i, n) = (i as i64, n as i64);
                match u8::from(lines_a.contains(&(i + n))) + u8::from(lines_b.contains(&(i - n))) {
                    2 => RegionClass::Determined,
                    1 => RegionClass::OneCharacteristic,
                    _ => RegionClass::Unconstrained,
                }
            };
            classes.push(class);
        }
    }
    Ok(RegionMap { n_x: grid.n_x, n_t: grid.n_t, classes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (GridSpec, ParallelogramSpec) {
        let g = GridSpec::unit_courant(30, 60).unwrap();
        (g, ParallelogramSpec::default_for(&g))
    }

    #[test]
    fn data_nodes_are_determined() {
        let (g, p) = setup();
        let map = determined_region_oracle(&g, &p, None, &OracleConfig::default()).unwrap();
        for node in p.nodes(&g).unwrap() {
            assert_eq!(map.get(node), RegionClass::Determined);
        }
    }

    #[test]
    fn reflector_only_enlarges() {
        let (g, p) = setup();
        let cfg = OracleConfig::default();
        let plain = determined_region_oracle(&g, &p, None, &cfg).unwrap();
        let refl = determined_region_oracle(&g, &p, Some(&ReflectorSpec::lower_half(&g)), &cfg).unwrap();
        for (a, b) in plain.classes.iter().zip(&refl.classes) {
            assert!(b.code() >= a.code());
        }
        assert!(refl.count(RegionClass::Determined) > plain.count(RegionClass::Determined));
    }

    #[test]
    fn non_unit_courant_is_unsupported() {
        let g = GridSpec::new(30, 60, 0.0, 1.0, 1.0, 1.0).unwrap();
        let p = ParallelogramSpec::default_for(&g);
        assert!(matches!(
            determined_region_oracle(&g, &p, None, &OracleConfig::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn single_data_node_fixes_only_itself_and_lines() {
        let g = GridSpec::unit_courant(10, 10).unwrap();
        let p = ParallelogramSpec { t_lo: 4, t_hi: 4, x_anchor: 5, slant: 0, width: 1 };
        let map = determined_region_oracle(&g, &p, None, &OracleConfig::default()).unwrap();
        assert_eq!(map.count(RegionClass::Determined), 1);
        assert_eq!(map.get(GridNode::new(6, 5)), RegionClass::OneCharacteristic);
        assert_eq!(map.get(GridNode::new(6, 4)), RegionClass::Unconstrained);
    }
}
