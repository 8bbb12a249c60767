use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use super::model::{Model, ModelParams};
use crate::error::{Error, Result};
use crate::tree::TubeTree;
use crate::word::Word;

/// Default quasi-similarity tolerance L.
pub const DEFAULT_TOLERANCE: f64 = 2.0;

/// One scaled copy of the model region.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CopyInfo {
    /// Which planted tree the copy belongs to.
    pub tree: usize,
    pub word: Word,
    /// Length scale of the copy relative to the model.
    pub scale: f64,
    pub first_cell: usize,
}

/// Meshed ambient ball around planted trees.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ambient {
    pub first_cell: usize,
    pub coords: Vec<[f64; 3]>,
    pub pitch: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ComplexOptions {
    /// Omit the interface between this word's copy and its parent.
    pub broken_interface: Option<Word>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SemmesComplex {
    pub n: usize,
    pub lambda: f64,
    pub tolerance: f64,
    pub model: Model,
    pub copies: Vec<CopyInfo>,
    pub ambient: Option<Ambient>,
    pub volumes: Vec<f64>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    lengths: Vec<f64>,
}

pub(super) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::ConfigInvalid { field: "lambda".into(), message: format!("{lambda} is not in (0, 1)") });
    }
    Ok(())
}

/// Words in level order: by depth, then lexicographically.
pub(super) fn level_order(words: impl IntoIterator<Item = Word>) -> Vec<Word> {
    let mut w: Vec<Word> = words.into_iter().collect();
    w.sort_by(|a, b| a.depth().cmp(&b.depth()).then_with(|| a.cmp(b)));
    w.dedup();
    w
}

/// Undirected edge lists become CSR adjacency sorted by target id.
pub(super) fn csr(cells: usize, edges: &[(usize, usize, f64)]) -> (Vec<usize>, Vec<u32>, Vec<f64>) {
    let mut deg = vec![0usize; cells + 1];
    for &(a, b, _) in edges {
        deg[a + 1] += 1;
        deg[b + 1] += 1;
    }
    for i in 0..cells {
        deg[i + 1] += deg[i];
    }
    let mut fill = deg.clone();
    let mut targets = vec![0u32; 2 * edges.len()];
    let mut lengths = vec![0.0; 2 * edges.len()];
    for &(a, b, l) in edges {
        for (u, v) in [(a, b), (b, a)] {
            targets[fill[u]] = v as u32;
            lengths[fill[u]] = l;
            fill[u] += 1;
        }
    }
    for u in 0..cells {
        let (s, e) = (deg[u], deg[u + 1]);
        let mut row: Vec<(u32, f64)> = targets[s..e].iter().copied().zip(lengths[s..e].iter().copied()).collect();
        row.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        for (k, (t, l)) in row.into_iter().enumerate() {
            targets[s + k] = t;
            lengths[s + k] = l;
        }
    }
    (deg, targets, lengths)
}

/// Scaled copies of the model for one tree, with their edges and interfaces.
pub(super) struct TreeCopies {
    pub copies: Vec<CopyInfo>,
    pub edges: Vec<(usize, usize, f64)>,
    pub volumes: Vec<f64>,
}

pub(super) fn copies_for_tree(
    model: &Model,
    words: &[Word],
    lambda: f64,
    base_scale: f64,
    tree: usize,
    first_cell: usize,
    opts: &ComplexOptions,
) -> Result<TreeCopies> {
    if words.first() != Some(&Word::root()) {
        return Err(Error::ConfigInvalid { field: "tree".into(), message: "tree has no root".into() });
    }
    let per = model.cell_count();
    let model_edges = model.edges();
    let ifaces = [model.interface_cells(0), model.interface_cells(1)];
    let v0 = model.cell_volume();
    let mut index = BTreeMap::new();
    let mut copies = Vec::with_capacity(words.len());
    let mut edges = Vec::new();
    let mut volumes = Vec::with_capacity(words.len() * per);
    for (i, w) in words.iter().enumerate() {
        let scale = base_scale * lambda.powi(w.depth() as i32);
        let first = first_cell + i * per;
        index.insert(w.clone(), i);
        copies.push(CopyInfo { tree, word: w.clone(), scale, first_cell: first });
        volumes.extend(std::iter::repeat_n(v0 * scale.powi(model.n as i32), per));
        edges.extend(model_edges.iter().map(|&(a, b, l)| (first + a, first + b, l * scale)));
        let Some(parent) = w.parent() else { continue };
        let Some(&pi) = index.get(&parent) else {
            return Err(Error::ConfigInvalid { field: "tree".into(), message: format!("word {w} has no parent copy") });
        };
        if opts.broken_interface.as_ref() == Some(w) {
            continue;
        }
        let pc = &copies[pi];
        let len = 0.5 * model.pitch[1] * (pc.scale + scale);
        let letter = w.last().unwrap() as usize - 1;
        edges.extend(ifaces[letter].iter().map(|&(a, b)| (pc.first_cell + a, first + b, len)));
    }
    Ok(TreeCopies { copies, edges, volumes })
}

impl SemmesComplex {
    pub(super) fn assemble(
        n: usize,
        lambda: f64,
        model: Model,
        copies: Vec<CopyInfo>,
        ambient: Option<Ambient>,
        volumes: Vec<f64>,
        edges: &[(usize, usize, f64)],
    ) -> Result<SemmesComplex> {
        if let Some(e) = edges.iter().find(|e| !(e.2 > 0.0)) {
            return Err(Error::MeshTooCoarse(format!("edge {:?} has non-positive length", e)));
        }
        let (offsets, targets, lengths) = csr(volumes.len(), edges);
        Ok(SemmesComplex { n, lambda, tolerance: DEFAULT_TOLERANCE, model, copies, ambient, volumes, offsets, targets, lengths })
    }

    pub fn cell_count(&self) -> usize {
        self.volumes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbours(&self, c: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.offsets[c], self.offsets[c + 1]);
        self.targets[s..e].iter().zip(&self.lengths[s..e]).map(|(&t, &l)| (t as usize, l))
    }

    /// Undirected edges `(a, b, length)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        (0..self.cell_count()).flat_map(|a| self.neighbours(a).filter(move |&(b, _)| a < b).map(move |(b, l)| (a, b, l))).collect()
    }

    /// Copy containing cell `c`, or `None` for ambient cells.
    pub fn copy_of(&self, c: usize) -> Option<&CopyInfo> {
        let per = self.model.cell_count();
        let i = self.copies.partition_point(|k| k.first_cell <= c);
        let k = self.copies.get(i.checked_sub(1)?)?;
        (c < k.first_cell + per).then_some(k)
    }

    pub fn copy_index(&self, tree: usize, w: &Word) -> Option<usize> {
        self.copies.iter().position(|k| k.tree == tree && &k.word == w)
    }

    pub fn copy_cells(&self, copy: usize) -> std::ops::Range<usize> {
        let f = self.copies[copy].first_cell;
        f..f + self.model.cell_count()
    }

    /// Cells of all depth-`k` copies of tree 0.
    pub fn level_cells(&self, k: usize) -> Vec<usize> {
        self.copies.iter().enumerate().filter(|(_, c)| c.tree == 0 && c.word.depth() == k).flat_map(|(i, _)| self.copy_cells(i)).collect()
    }

    pub fn depth(&self) -> usize {
        self.copies.iter().filter(|c| c.tree == 0).map(|c| c.word.depth()).max().unwrap_or(0)
    }

    /// Same complex with lengths times `s` and volumes times `sⁿ`.
    pub fn rescaled(&self, s: f64) -> SemmesComplex {
        let mut c = self.clone();
        c.lengths.iter_mut().for_each(|l| *l *= s);
        c.volumes.iter_mut().for_each(|v| *v *= s.powi(self.n as i32));
        c.copies.iter_mut().for_each(|k| k.scale *= s);
        if let Some(a) = c.ambient.as_mut() {
            a.pitch *= s;
        }
        c
    }

    /// Edge length scale at cell `c`.
    pub fn local_pitch(&self, c: usize) -> f64 {
        match self.copy_of(c) {
            Some(k) => k.scale * self.model.pitch[1],
            None => self.ambient.as_ref().map(|a| a.pitch).unwrap_or(self.model.pitch[1]),
        }
    }

    /// Model coordinates (copies) or ambient coordinates of a cell.
    pub fn coords(&self, c: usize) -> Vec<f64> {
        match self.copy_of(c) {
            Some(k) => {
                let local = c - k.first_cell;
                let cc = self.model.circle_cells;
                let m = self.model.base[local / cc].coords;
                let mut v = m.to_vec();
                if self.model.n == 4 {
                    v.push((local % cc) as f64 * self.model.pitch[2]);
                }
                v
            }
            None => {
                let a = self.ambient.as_ref().expect("cell outside every copy");
                a.coords[c - a.first_cell].to_vec()
            }
        }
    }

    /// Connected components of the adjacency graph.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.cell_count()];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.cell_count() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for (v, _) in self.neighbours(u) {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }
}

/// Builds the complex over the words of `tree`, one model copy per word.
pub fn build_complex(tree: &TubeTree, lambda: f64, mesh_scale: f64, n: usize) -> Result<SemmesComplex> {
    build_complex_with(tree.tubes.keys().cloned(), lambda, ModelParams::default(), mesh_scale, n, &ComplexOptions::default())
}

pub fn build_complex_with(
    words: impl IntoIterator<Item = Word>,
    lambda: f64,
    params: ModelParams,
    mesh_scale: f64,
    n: usize,
    opts: &ComplexOptions,
) -> Result<SemmesComplex> {
    check_lambda(lambda)?;
    let model = Model::new(params, mesh_scale, n)?;
    let words = level_order(words);
    let t = copies_for_tree(&model, &words, lambda, 1.0, 0, 0, opts)?;
    SemmesComplex::assemble(n, lambda, model, t.copies, None, t.volumes, &t.edges)
}

/// Every word of depth at most `depth`.
pub fn full_words(depth: usize) -> Result<Vec<Word>> {
    crate::word::up_to_level(depth)
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64, u32);

impl Eq for Key {}

impl Ord for Key {
    // reversed for a min-heap; ties broken by cell id
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable buffers for label-setting shortest paths.
pub struct Scratch {
    dist: Vec<f64>,
    touched: Vec<u32>,
    heap: BinaryHeap<Key>,
}

impl Scratch {
    pub fn new(cells: usize) -> Self {
        Scratch { dist: vec![f64::INFINITY; cells], touched: Vec::new(), heap: BinaryHeap::new() }
    }

    fn reset(&mut self) {
        for &t in &self.touched {
            self.dist[t as usize] = f64::INFINITY;
        }
        self.touched.clear();
        self.heap.clear();
    }
}

impl SemmesComplex {
    /// Cells within `radius` of `src` with their distances, in settling order.
    ///
    /// With `stop = Some(y)` the search ends as soon as `y` is settled.
    pub fn settle(&self, src: usize, radius: f64, stop: Option<usize>, s: &mut Scratch) -> Vec<(usize, f64)> {
        s.reset();
        let mut out = Vec::new();
        s.dist[src] = 0.0;
        s.touched.push(src as u32);
        s.heap.push(Key(0.0, src as u32));
        while let Some(Key(d, u)) = s.heap.pop() {
            let u = u as usize;
            if d > s.dist[u] {
                continue;
            }
            if d > radius {
                break;
            }
            out.push((u, d));
            if stop == Some(u) {
                break;
            }
            for (v, l) in self.neighbours(u) {
                let nd = d + l;
                if nd < s.dist[v] {
                    if s.dist[v].is_infinite() {
                        s.touched.push(v as u32);
                    }
                    s.dist[v] = nd;
                    s.heap.push(Key(nd, v as u32));
                }
            }
        }
        out
    }

    pub fn scratch(&self) -> Scratch {
        Scratch::new(self.cell_count())
    }

    /// Shortest-path length; infinite when `y` is unreachable.
    pub fn distance(&self, x: usize, y: usize) -> f64 {
        let mut s = self.scratch();
        self.distance_with(x, y, &mut s)
    }

    /// Searches from the smaller id so that `d(x, y)` and `d(y, x)` agree bit for bit.
    pub fn distance_with(&self, x: usize, y: usize, s: &mut Scratch) -> f64 {
        let (x, y) = (x.min(y), x.max(y));
        match self.settle(x, f64::INFINITY, Some(y), s).last() {
            Some(&(c, d)) if c == y => d,
            _ => f64::INFINITY,
        }
    }

    /// Compensated sum of volume weights, in ascending cell order.
    pub fn measure(&self, cells: &[usize]) -> f64 {
        let mut c = cells.to_vec();
        c.sort_unstable();
        c.dedup();
        let (mut sum, mut err) = (0.0f64, 0.0f64);
        for &i in &c {
            let v = self.volumes[i];
            let t = sum + v;
            err += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
        }
        sum + err
    }

    pub fn level_measure(&self, k: usize) -> f64 {
        self.measure(&self.level_cells(k))
    }

    /// Double-sweep lower estimate of the diameter.
    pub fn diameter_estimate(&self) -> f64 {
        let mut s = self.scratch();
        let far = |x: usize, s: &mut Scratch| *self.settle(x, f64::INFINITY, None, s).last().unwrap();
        let (a, _) = far(0, &mut s);
        far(a, &mut s).1
    }

    /// Graph dump `{"cells": [...], "edges": [[a, b, length], ...], "lambda": λ}`.
    pub fn to_json(&self) -> serde_json::Value {
        let cells: Vec<serde_json::Value> = (0..self.cell_count())
            .map(|c| {
                let word = self.copy_of(c).map(|k| k.word.to_string());
                let tree = self.copy_of(c).map(|k| k.tree);
                serde_json::json!({"id": c, "tree": tree, "word": word, "volume": self.volumes[c], "coords": self.coords(c)})
            })
            .collect();
        let edges: Vec<(usize, usize, f64)> = self.edges();
        serde_json::json!({"cells": cells, "edges": edges, "lambda": self.lambda})
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complex(depth: usize, lambda: f64) -> SemmesComplex {
        build_complex_with(full_words(depth).unwrap(), lambda, ModelParams::default(), 0.125, 3, &ComplexOptions::default()).unwrap()
    }

    #[test]
    fn json_dump_round_trips_counts() {
        let c = complex(1, 0.4);
        let v = c.to_json();
        assert_eq!(v["cells"].as_array().unwrap().len(), c.cell_count());
        assert_eq!(v["edges"].as_array().unwrap().len(), c.edge_count());
        assert_eq!(v["lambda"], 0.4);
        let last = &v["cells"][c.cell_count() - 1];
        assert_eq!(last["word"], "2");
        assert_eq!(v["cells"][0]["word"], "");
    }

    #[test]
    fn level_measure_law() {
        let c = complex(3, 0.4);
        let m0 = c.level_measure(0);
        assert!((m0 - c.model.region_volume()).abs() < 1e-12 * m0);
        for k in 1..=3 {
            let expect = (2.0 * 0.4f64.powi(3)).powi(k as i32) * m0;
            assert!((c.level_measure(k) - expect).abs() < 1e-12 * expect);
        }
        assert_eq!(c.measure(&[]), 0.0);
        assert_eq!(c.component_count(), 1);
    }

    #[test]
    fn depth_two_edges_scale() {
        let c = complex(2, 0.4);
        let k = c.copy_index(0, &"12".parse().unwrap()).unwrap();
        let f = c.copies[k].first_cell;
        let (a, b, l) = c.model.edges()[0];
        let got = c.neighbours(f + a).find(|&(v, _)| v == f + b).unwrap().1;
        assert!((got - 0.16 * l).abs() < 1e-15);
    }

    #[test]
    fn distance_basics() {
        let c = complex(1, 0.4);
        assert_eq!(c.distance(5, 5), 0.0);
        let (v, l) = c.neighbours(5).next().unwrap();
        assert!(c.distance(5, v) <= l);
        assert_eq!(c.distance(7, 300), c.distance(300, 7));
    }

    #[test]
    fn broken_interface_disconnects() {
        let opts = ComplexOptions { broken_interface: Some("2".parse().unwrap()) };
        let c = build_complex_with(full_words(1).unwrap(), 0.4, ModelParams::default(), 0.125, 3, &opts).unwrap();
        assert_eq!(c.component_count(), 2);
    }
}
