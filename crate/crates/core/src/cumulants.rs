//! Joint cumulants from moments and back, exact Gaussian moments by perfect
//! matchings, cyclic-permutation formulas for squared Gaussian fields, and
//! the discrete Gaussian free field on grids with zero boundary.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::poly::Polynomial;
use crate::scalar::{factorial, Scalar};

/// Ground-set cap for set-partition sums (Bell(8) = 4140 partitions).
pub const PARTITION_GROUND_CAP: usize = 8;

/// Iterator over all set partitions of `{0, …, k−1}`, encoded as restricted
/// growth strings; each partition is yielded exactly once as a block list.
pub struct SetPartitions {
    k: usize,
    rgs: Vec<usize>,
    started: bool,
    done: bool,
}

impl SetPartitions {
    pub fn new(k: usize) -> Self {
        SetPartitions {
            k,
            rgs: vec![0; k.max(1)],
            started: false,
            done: false,
        }
    }

    fn blocks(&self) -> Vec<Vec<usize>> {
        if self.k == 0 {
            return Vec::new();
        }
        let count = self.rgs[..self.k].iter().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); count];
        for (i, &b) in self.rgs[..self.k].iter().enumerate() {
            blocks[b].push(i);
        }
        blocks
    }

    fn advance(&mut self) -> bool {
        // increment the rightmost digit that may still grow, reset the suffix
        for i in (1..self.k).rev() {
            let prefix_max = *self.rgs[..i].iter().max().unwrap();
            if self.rgs[i] <= prefix_max {
                self.rgs[i] += 1;
                for j in i + 1..self.k {
                    self.rgs[j] = 0;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<Vec<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            let out = self.blocks();
            if self.k == 0 {
                self.done = true;
            }
            return Some(out);
        }
        if self.advance() {
            Some(self.blocks())
        } else {
            self.done = true;
            None
        }
    }
}

fn check_ground(k: usize) -> Result<()> {
    if k > PARTITION_GROUND_CAP {
        return Err(Error::Capacity(format!(
            "ground set of {k} exceeds the partition cap of {PARTITION_GROUND_CAP}"
        )));
    }
    Ok(())
}

/// Joint cumulant of positions `0..k` from a moment oracle:
/// `Σ_{π} (|π|−1)! (−1)^{|π|−1} ∏_{B∈π} E[∏_{i∈B} X_i]`.
pub fn joint_cumulant<S: Scalar>(k: usize, mut moment: impl FnMut(&[usize]) -> S) -> Result<S> {
    check_ground(k)?;
    if k == 0 {
        return Err(Error::Argument("cumulant of an empty family".into()));
    }
    let mut total = S::zero();
    for partition in SetPartitions::new(k) {
        let blocks = partition.len();
        let mut prefactor = S::one();
        for j in 1..blocks {
            prefactor = prefactor * S::from_i64(j as i64);
        }
        if (blocks - 1) % 2 == 1 {
            prefactor = -prefactor;
        }
        let mut term = prefactor;
        for block in &partition {
            term = term * moment(block);
        }
        total = total + term;
    }
    Ok(total)
}

/// Moment of positions `0..k` from a cumulant oracle:
/// `Σ_{π} ∏_{B∈π} κ(X_i : i ∈ B)`; the exact inverse of [`joint_cumulant`].
pub fn cumulants_to_moments<S: Scalar>(
    k: usize,
    mut cumulant: impl FnMut(&[usize]) -> S,
) -> Result<S> {
    check_ground(k)?;
    if k == 0 {
        return Err(Error::Argument("moment of an empty family".into()));
    }
    let mut total = S::zero();
    for partition in SetPartitions::new(k) {
        let mut term = S::one();
        for block in &partition {
            term = term * cumulant(block);
        }
        total = total + term;
    }
    Ok(total)
}

/// Exact centered-Gaussian moment `E[∏ X_i]` over the covariance `c`: the
/// sum over perfect matchings of covariance products; zero for odd size.
pub fn isserlis_moment<S: Scalar>(c: &Matrix<S>, indices: &[usize]) -> S {
    if indices.len() % 2 == 1 {
        return S::zero();
    }
    if indices.is_empty() {
        return S::one();
    }
    let first = indices[0];
    let mut total = S::zero();
    for j in 1..indices.len() {
        let mut rest: Vec<usize> = Vec::with_capacity(indices.len() - 2);
        rest.extend_from_slice(&indices[1..j]);
        rest.extend_from_slice(&indices[j + 1..]);
        let pair = c.at(first, indices[j]).clone();
        total = total + pair * isserlis_moment(c, &rest);
    }
    total
}

/// Sum over the `(k−1)!` full-cycle permutations of `∏_α C(x_α, x_{σ(α)})`.
pub fn cyp<S: Scalar>(c: &Matrix<S>, points: &[usize]) -> Result<S> {
    let k = points.len();
    if k == 0 {
        return Err(Error::Argument("cyp needs at least one point".into()));
    }
    if k == 1 {
        return Ok(c.at(points[0], points[0]).clone());
    }
    // cycles are visit sequences [0, p_1, …, p_{k−1}] over permutations p
    let mut total = S::zero();
    let mut order: Vec<usize> = (1..k).collect();
    permute(&mut order, 0, &mut |perm| {
        let mut term = S::one();
        let mut prev = points[0];
        for &pos in perm.iter() {
            term = term * c.at(prev, points[pos]).clone();
            prev = points[pos];
        }
        term = term * c.at(prev, points[0]).clone();
        total = total.clone() + term;
    });
    Ok(total)
}

fn permute<F: FnMut(&[usize])>(items: &mut Vec<usize>, start: usize, visit: &mut F) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SquaredKind {
    /// Real process with covariance `C/2`; the cumulant is `½·cyp(C)`.
    Real,
    /// Complex process with covariance `C`; the cumulant is `cyp(C)`.
    Complex,
}

/// Cumulant of squared Gaussian coordinates per the cyclic-permutation
/// formula; `c` is the matrix named in the corresponding proposition.
pub fn squared_gaussian_cumulants<S: Scalar>(
    c: &Matrix<S>,
    points: &[usize],
    kind: SquaredKind,
) -> Result<S> {
    let base = cyp(c, points)?;
    Ok(match kind {
        SquaredKind::Real => base / S::from_i64(2),
        SquaredKind::Complex => base,
    })
}

/// A finite box in `Z^d` with nearest-neighbor adjacency and a non-empty
/// zero-boundary vertex set.
#[derive(Clone, Debug)]
pub struct GridSpec {
    sides: Vec<usize>,
    boundary: BTreeSet<usize>,
}

impl GridSpec {
    pub fn new(sides: Vec<usize>, boundary: BTreeSet<usize>) -> Result<Self> {
        if sides.is_empty() || sides.contains(&0) {
            return Err(Error::Argument("grid sides must be positive".into()));
        }
        let spec = GridSpec { sides, boundary };
        let count = spec.vertex_count();
        if spec.boundary.is_empty() {
            return Err(Error::Boundary("boundary set must be non-empty".into()));
        }
        if spec.boundary.iter().any(|&v| v >= count) {
            return Err(Error::Boundary("boundary vertex out of range".into()));
        }
        if spec.boundary.len() == count {
            return Err(Error::Boundary("interior is empty".into()));
        }
        Ok(spec)
    }

    /// Box with every face vertex (any coordinate on the box edge) as
    /// boundary.
    pub fn with_all_sides_boundary(sides: Vec<usize>) -> Result<Self> {
        let tmp = GridSpec {
            sides: sides.clone(),
            boundary: BTreeSet::new(),
        };
        let boundary: BTreeSet<usize> = (0..tmp.vertex_count())
            .filter(|&v| {
                let coords = tmp.coords(v);
                coords
                    .iter()
                    .zip(&tmp.sides)
                    .any(|(&c, &s)| c == 0 || c + 1 == s)
            })
            .collect();
        GridSpec::new(sides, boundary)
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    pub fn vertex_count(&self) -> usize {
        self.sides.iter().product()
    }

    pub fn coords(&self, v: usize) -> Vec<usize> {
        let mut rest = v;
        let mut out = Vec::with_capacity(self.sides.len());
        for &s in &self.sides {
            out.push(rest % s);
            rest /= s;
        }
        out
    }

    pub fn index(&self, coords: &[usize]) -> Option<usize> {
        if coords.len() != self.sides.len() {
            return None;
        }
        let mut idx = 0;
        let mut stride = 1;
        for (&c, &s) in coords.iter().zip(&self.sides) {
            if c >= s {
                return None;
            }
            idx += c * stride;
            stride *= s;
        }
        Some(idx)
    }

    /// `v + e_dir`, when it stays inside the box.
    pub fn shift(&self, v: usize, dir: usize) -> Option<usize> {
        let mut coords = self.coords(v);
        coords[dir] += 1;
        self.index(&coords)
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let coords = self.coords(v);
        let mut out = Vec::new();
        for dir in 0..self.dim() {
            let mut up = coords.clone();
            up[dir] += 1;
            if let Some(u) = self.index(&up) {
                out.push(u);
            }
            if coords[dir] > 0 {
                let mut down = coords.clone();
                down[dir] -= 1;
                out.push(self.index(&down).unwrap());
            }
        }
        out
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary.contains(&v)
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|v| !self.is_boundary(*v))
            .collect()
    }
}

/// DGFF covariance data: the inverse of `(−Δ restricted to V∖C)/(2d)` plus
/// the interior indexing, extended by zeros onto the boundary.
#[derive(Clone, Debug)]
pub struct DgffField<S> {
    grid: GridSpec,
    interior: Vec<usize>,
    index_of: HashMap<usize, usize>,
    covariance: Matrix<S>,
}

/// Builds the zero-boundary DGFF covariance on a grid. The precision matrix
/// keeps the full-lattice diagonal `2d` on every interior vertex.
pub fn dgff_covariance<S: Scalar>(grid: &GridSpec) -> Result<DgffField<S>> {
    let interior = grid.interior();
    if interior.is_empty() {
        return Err(Error::Boundary("interior is empty".into()));
    }
    let index_of: HashMap<usize, usize> =
        interior.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let d = grid.dim();
    let two_d = S::from_i64(2 * d as i64);
    let k = interior.len();
    let mut neg_lap = Matrix::zeros(k, k);
    for (i, &v) in interior.iter().enumerate() {
        neg_lap.set(i, i, two_d.clone());
        for u in grid.neighbors(v) {
            if let Some(&j) = index_of.get(&u) {
                neg_lap.set(i, j, -S::one());
            }
        }
    }
    let precision = neg_lap.scale(&(S::one() / two_d));
    let covariance = precision
        .inverse()
        .map_err(|_| Error::Boundary("reduced precision matrix is singular".into()))?;
    Ok(DgffField {
        grid: grid.clone(),
        interior,
        index_of,
        covariance,
    })
}

impl<S: Scalar> DgffField<S> {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Covariance matrix over the interior vertices, in `interior()` order.
    pub fn covariance_matrix(&self) -> &Matrix<S> {
        &self.covariance
    }

    /// `Cov(φ_u, φ_v)`; zero whenever either vertex carries the boundary
    /// condition.
    pub fn covariance(&self, u: usize, v: usize) -> S {
        match (self.index_of.get(&u), self.index_of.get(&v)) {
            (Some(&i), Some(&j)) => self.covariance.at(i, j).clone(),
            _ => S::zero(),
        }
    }

    /// Covariance of two gradient components `∇_iφ(v) = φ(v+e_i) − φ(v)`.
    pub fn gradient_covariance(&self, a: (usize, usize), b: (usize, usize)) -> Result<S> {
        let (v, i) = a;
        let (u, j) = b;
        let vi = self
            .grid
            .shift(v, i)
            .ok_or_else(|| Error::Range(format!("vertex {v} has no neighbor in direction {i}")))?;
        let uj = self
            .grid
            .shift(u, j)
            .ok_or_else(|| Error::Range(format!("vertex {u} has no neighbor in direction {j}")))?;
        Ok(self.covariance(vi, uj) - self.covariance(v, uj) - self.covariance(vi, u)
            + self.covariance(v, u))
    }

    fn check_gradient_points(&self, points: &[usize]) -> Result<()> {
        if points.is_empty() {
            return Err(Error::Argument("no points given".into()));
        }
        for &v in points {
            if v >= self.grid.vertex_count() {
                return Err(Error::Range(format!("vertex {v} outside the lattice")));
            }
            if self.grid.is_boundary(v) {
                return Err(Error::Argument(format!("vertex {v} is on the boundary")));
            }
            for dir in 0..self.grid.dim() {
                if self.grid.shift(v, dir).is_none() {
                    return Err(Error::Range(format!(
                        "gradient at {v} leaves the grid in direction {dir}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Joint cumulant of the gradient-squared field
    /// `Φ(v) = Σ_i (φ(v+e_i) − φ(v))²` at the given interior vertices, by
    /// multilinearity over direction tuples and the cyclic-permutation
    /// formula for each tuple.
    pub fn gradient_squared_cumulant(&self, points: &[usize]) -> Result<S> {
        self.check_gradient_points(points)?;
        let k = points.len();
        let d = self.grid.dim();
        let mut total = S::zero();
        let mut dirs = vec![0usize; k];
        loop {
            let mut sigma = Matrix::zeros(k, k);
            for a in 0..k {
                for b in 0..k {
                    sigma.set(
                        a,
                        b,
                        self.gradient_covariance((points[a], dirs[a]), (points[b], dirs[b]))?,
                    );
                }
            }
            // κ of squared components with covariance Σ is 2^{k−1}·cyp(Σ)
            let mut term = cyp(&sigma, &(0..k).collect::<Vec<_>>())?;
            for _ in 1..k {
                term = term * S::from_i64(2);
            }
            total = total + term;
            // odometer over direction tuples
            let mut pos = 0;
            loop {
                if pos == k {
                    return Ok(total);
                }
                dirs[pos] += 1;
                if dirs[pos] < d {
                    break;
                }
                dirs[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Joint cumulant of the squared field `φ²` at interior vertices, via
    /// the cyclic-permutation formula with `C = 2·Cov(φ)`.
    pub fn squared_field_cumulant(&self, points: &[usize]) -> Result<S> {
        if points.is_empty() {
            return Err(Error::Argument("no points given".into()));
        }
        let k = points.len();
        for &v in points {
            if v >= self.grid.vertex_count() {
                return Err(Error::Range(format!("vertex {v} outside the lattice")));
            }
            if self.grid.is_boundary(v) {
                return Err(Error::Argument(format!("vertex {v} is on the boundary")));
            }
        }
        let c = Matrix::from_fn(k, k, |a, b| {
            self.covariance(points[a], points[b]) * S::from_i64(2)
        });
        squared_gaussian_cumulants(&c, &(0..k).collect::<Vec<_>>(), SquaredKind::Real)
    }

    /// The same cumulant through Isserlis moments plus set-partition
    /// inversion; an independent oracle for
    /// [`Self::gradient_squared_cumulant`].
    pub fn gradient_squared_cumulant_isserlis(&self, points: &[usize]) -> Result<S> {
        self.check_gradient_points(points)?;
        let k = points.len();
        let d = self.grid.dim();
        let moment = |block: &[usize]| -> S {
            // E[∏_{j∈B} Φ(v_j)] = Σ over direction tuples of E[∏ D²]
            let b = block.len();
            let mut total = S::zero();
            let mut dirs = vec![0usize; b];
            loop {
                let mut sigma = Matrix::zeros(b, b);
                for x in 0..b {
                    for y in 0..b {
                        sigma.set(
                            x,
                            y,
                            self.gradient_covariance(
                                (points[block[x]], dirs[x]),
                                (points[block[y]], dirs[y]),
                            )
                            .expect("points pre-checked"),
                        );
                    }
                }
                let doubled: Vec<usize> = (0..b).flat_map(|i| [i, i]).collect();
                total = total + isserlis_moment(&sigma, &doubled);
                let mut pos = 0;
                loop {
                    if pos == b {
                        return total;
                    }
                    dirs[pos] += 1;
                    if dirs[pos] < d {
                        break;
                    }
                    dirs[pos] = 0;
                    pos += 1;
                }
            }
        };
        joint_cumulant(k, moment)
    }
}

/// Truncated moment generating function `exp(Σ_m κ_m t^m / ∏ m_i!)` from a
/// cumulant array over multi-indices `1 ≤ |m| ≤ max_deg`.
pub fn mgf_from_cumulants<S: Scalar>(
    dims: usize,
    max_deg: usize,
    kappa: &impl Fn(&[u8]) -> S,
) -> Result<Polynomial<S>> {
    let mut series = Polynomial::zero(dims);
    let mut exps = vec![0u8; dims];
    loop {
        let total: usize = exps.iter().map(|&e| e as usize).sum();
        if total >= 1 && total <= max_deg {
            let mut denom = S::one();
            for &e in &exps {
                denom = denom * factorial::<S>(e as usize);
            }
            let coeff = kappa(&exps) / denom;
            series = series.add(&Polynomial::monomial(dims, exps.clone(), coeff))?;
        }
        let mut pos = 0;
        loop {
            if pos == dims {
                return series.exp_truncated(max_deg);
            }
            exps[pos] += 1;
            if (exps[pos] as usize) <= max_deg {
                break;
            }
            exps[pos] = 0;
            pos += 1;
        }
    }
}

/// One row of a cumulant table: arity, the points (as grid coordinates) and
/// the value rendered as text.
#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub k: usize,
    pub points: Vec<Vec<usize>>,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CumulantTable {
    pub lattice: Vec<usize>,
    pub rows: Vec<TableRow>,
}

impl CumulantTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("k\tpoints\tvalue\n");
        for row in &self.rows {
            let points = row
                .points
                .iter()
                .map(|p| {
                    format!(
                        "({})",
                        p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
                    )
                })
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!("{}\t{}\t{}\n", row.k, points, row.value));
        }
        out
    }
}

fn tuple_table<S: Scalar>(
    field: &DgffField<S>,
    points: &[usize],
    max_k: usize,
    eval: impl Fn(&[usize]) -> Result<S>,
) -> Result<CumulantTable> {
    if points.is_empty() {
        return Err(Error::Argument("no points given".into()));
    }
    let mut rows = Vec::new();
    for k in 1..=max_k {
        let mut tuple = vec![0usize; k];
        'tuples: loop {
            let chosen: Vec<usize> = tuple.iter().map(|&i| points[i]).collect();
            let value = eval(&chosen)?;
            rows.push(TableRow {
                k,
                points: chosen.iter().map(|&v| field.grid().coords(v)).collect(),
                value: value.to_string(),
            });
            // advance to the next non-decreasing tuple
            let mut pos = k;
            while pos > 0 {
                pos -= 1;
                if tuple[pos] + 1 < points.len() {
                    tuple[pos] += 1;
                    for j in pos + 1..k {
                        tuple[j] = tuple[pos];
                    }
                    continue 'tuples;
                }
            }
            break;
        }
    }
    Ok(CumulantTable {
        lattice: field.grid().sides().to_vec(),
        rows,
    })
}

/// Gradient-squared cumulant table on a grid: every non-decreasing point
/// tuple from `points` for each arity up to `max_k`. Raw finite-lattice
/// values only; no limit or tolerance is implied.
pub fn gradient_squared_table<S: Scalar>(
    field: &DgffField<S>,
    points: &[usize],
    max_k: usize,
) -> Result<CumulantTable> {
    tuple_table(field, points, max_k, |chosen| {
        field.gradient_squared_cumulant(chosen)
    })
}

/// Squared-field cumulant table on a grid, same layout as
/// [`gradient_squared_table`].
pub fn squared_field_table<S: Scalar>(
    field: &DgffField<S>,
    points: &[usize],
    max_k: usize,
) -> Result<CumulantTable> {
    tuple_table(field, points, max_k, |chosen| {
        field.squared_field_cumulant(chosen)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;
    use num_traits::Zero;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn bell(k: usize) -> usize {
        SetPartitions::new(k).count()
    }

    #[test]
    fn partition_counts_are_bell_numbers() {
        for (k, b) in [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (8, 4140)] {
            assert_eq!(bell(k), b);
        }
    }

    #[test]
    fn pair_cumulant_is_covariance() {
        // E[X0] = 1, E[X1] = 2, E[X0X1] = 5 → κ = 5 − 2 = 3
        let moment = |b: &[usize]| -> Rat {
            match b {
                [0] => Rat::from_i64(1),
                [1] => Rat::from_i64(2),
                [0, 1] => Rat::from_i64(5),
                _ => unreachable!(),
            }
        };
        assert_eq!(joint_cumulant(2, moment).unwrap(), Rat::from_i64(3));
        // a single variable gives the mean
        assert_eq!(
            joint_cumulant(1, |_: &[usize]| Rat::from_i64(7)).unwrap(),
            Rat::from_i64(7)
        );
        assert!(joint_cumulant(9, |_: &[usize]| Rat::zero()).is_err());
    }

    #[test]
    fn moments_from_pair_cumulants() {
        // all cumulants zero except κ(i,i) = σ² → E[X⁴] = 3σ⁴
        let sigma2 = Rat::from_i64(2);
        let cumulant = |b: &[usize]| -> Rat {
            if b.len() == 2 {
                sigma2.clone()
            } else {
                Rat::zero()
            }
        };
        assert_eq!(cumulants_to_moments(4, cumulant).unwrap(), Rat::from_i64(12));
        assert_eq!(
            cumulants_to_moments(1, |_: &[usize]| Rat::from_i64(5)).unwrap(),
            Rat::from_i64(5)
        );
    }

    #[test]
    fn moment_cumulant_round_trip() {
        let mut rng = StdRng::seed_from_u64(2024);
        for k in 1..=5 {
            // a fixed random moment table indexed by label subsets
            let mut table: HashMap<Vec<usize>, Rat> = HashMap::new();
            for mask in 1u32..(1 << k) {
                let sub: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
                table.insert(
                    sub,
                    Rat::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=9)),
                );
            }
            // cumulants of every subset from the moments
            let mut cums: HashMap<Vec<usize>, Rat> = HashMap::new();
            for mask in 1u32..(1 << k) {
                let sub: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
                let val = joint_cumulant(sub.len(), |positions: &[usize]| {
                    let labels: Vec<usize> = positions.iter().map(|&p| sub[p]).collect();
                    table[&labels].clone()
                })
                .unwrap();
                cums.insert(sub, val);
            }
            // moments back from the cumulants
            let top: Vec<usize> = (0..k).collect();
            let rebuilt = cumulants_to_moments(k, |positions: &[usize]| {
                let labels: Vec<usize> = positions.iter().map(|&p| top[p]).collect();
                cums[&labels].clone()
            })
            .unwrap();
            assert_eq!(rebuilt, table[&top]);
        }
    }

    #[test]
    fn isserlis_examples() {
        let c: Matrix<Rat> = Matrix::from_int_rows(&[&[3, 1], &[1, 2]]);
        // E[X²] = C(0,0)
        assert_eq!(isserlis_moment(&c, &[0, 0]), Rat::from_i64(3));
        // E[X⁴] = 3 C(0,0)²
        assert_eq!(isserlis_moment(&c, &[0, 0, 0, 0]), Rat::from_i64(27));
        // odd moments vanish
        assert!(isserlis_moment(&c, &[0, 1, 1]).is_zero());
        // E[X²Y²] = C00·C11 + 2·C01²
        assert_eq!(isserlis_moment(&c, &[0, 0, 1, 1]), Rat::from_i64(8));
    }

    #[test]
    fn cyp_small_cases() {
        let c: Matrix<Rat> = Matrix::from_int_rows(&[&[2, 3, 5], &[3, 7, 11], &[5, 11, 13]]);
        // k = 1: the diagonal entry
        assert_eq!(cyp(&c, &[0]).unwrap(), Rat::from_i64(2));
        // k = 2: C01·C10
        assert_eq!(cyp(&c, &[0, 1]).unwrap(), Rat::from_i64(9));
        // k = 3: two 3-cycles, each C01·C12·C20
        assert_eq!(cyp(&c, &[0, 1, 2]).unwrap(), Rat::from_i64(2 * 3 * 11 * 5));
        // invariant under reordering
        assert_eq!(cyp(&c, &[2, 0, 1]).unwrap(), cyp(&c, &[0, 1, 2]).unwrap());
    }

    #[test]
    fn squared_cumulants_match_isserlis_route() {
        let mut rng = StdRng::seed_from_u64(7);
        for k in 1..=4 {
            // random SPD C via BᵀB + I
            let b: Matrix<Rat> = Matrix::from_fn(k, k, |_, _| Rat::from_i64(rng.gen_range(-2..=2)));
            let c = b
                .transpose()
                .mul(&b)
                .unwrap()
                .add(&Matrix::identity(k))
                .unwrap();
            assert!(c.is_positive_definite());
            // process covariance C/2; moments of squares via Isserlis
            let half_c = c.scale(&Rat::from_ratio(1, 2));
            let points: Vec<usize> = (0..k).collect();
            let expected = joint_cumulant(k, |block: &[usize]| {
                let doubled: Vec<usize> = block.iter().flat_map(|&i| [i, i]).collect();
                isserlis_moment(&half_c, &doubled)
            })
            .unwrap();
            let formula = squared_gaussian_cumulants(&c, &points, SquaredKind::Real).unwrap();
            assert_eq!(formula, expected);
        }
    }

    #[test]
    fn complex_squared_cumulants_via_block_representation() {
        let mut rng = StdRng::seed_from_u64(17);
        for k in 1..=3 {
            let b: Matrix<Rat> = Matrix::from_fn(k, k, |_, _| Rat::from_i64(rng.gen_range(-2..=2)));
            let c = b
                .transpose()
                .mul(&b)
                .unwrap()
                .add(&Matrix::identity(k))
                .unwrap();
            // |Z|² = X² + Y² with (X,Y) ~ N(0, ½ diag(C,C)) for real kernels
            let block = c.double_block_diagonal().scale(&Rat::from_ratio(1, 2));
            let expected = joint_cumulant(k, |blk: &[usize]| {
                // E[∏ (X_i² + Y_i²)] expands over X/Y choices per slot
                let b_len = blk.len();
                let mut total = Rat::zero();
                for choice in 0u32..(1 << b_len) {
                    let doubled: Vec<usize> = blk
                        .iter()
                        .enumerate()
                        .flat_map(|(pos, &i)| {
                            let idx = if choice >> pos & 1 == 1 { i + k } else { i };
                            [idx, idx]
                        })
                        .collect();
                    total += isserlis_moment(&block, &doubled);
                }
                total
            })
            .unwrap();
            let points: Vec<usize> = (0..k).collect();
            let formula = squared_gaussian_cumulants(&c, &points, SquaredKind::Complex).unwrap();
            assert_eq!(formula, expected);
        }
    }

    #[test]
    fn dgff_segment_examples() {
        // d = 1, segment {0,1,2}, boundary {0,2}: Var(φ₁) = 1
        let grid = GridSpec::new(vec![3], BTreeSet::from([0, 2])).unwrap();
        let field: DgffField<Rat> = dgff_covariance(&grid).unwrap();
        assert_eq!(field.covariance(1, 1), Rat::from_i64(1));
        assert!(field.covariance(0, 1).is_zero());

        // d = 1, segment {0,1,2,3}, boundary {0,3}
        let grid = GridSpec::new(vec![4], BTreeSet::from([0, 3])).unwrap();
        let field: DgffField<Rat> = dgff_covariance(&grid).unwrap();
        let m = Matrix::from_int_rows(&[&[2, -1], &[-1, 2]]).scale(&Rat::from_ratio(1, 2));
        assert_eq!(field.covariance_matrix(), &m.inverse().unwrap());

        // boundary = everything → error
        assert!(GridSpec::new(vec![2], BTreeSet::from([0, 1])).is_err());
        // empty boundary → error
        assert!(GridSpec::new(vec![3], BTreeSet::new()).is_err());
    }

    #[test]
    fn gradient_squared_mean_is_variance_sum() {
        let grid = GridSpec::with_all_sides_boundary(vec![5, 5]).unwrap();
        let field: DgffField<Rat> = dgff_covariance(&grid).unwrap();
        let v = grid.index(&[2, 2]).unwrap();
        let kappa1 = field.gradient_squared_cumulant(&[v]).unwrap();
        let mut var_sum = Rat::zero();
        for dir in 0..2 {
            var_sum += field.gradient_covariance((v, dir), (v, dir)).unwrap();
        }
        assert_eq!(kappa1, var_sum);
    }

    #[test]
    fn gradient_squared_routes_agree() {
        let grid = GridSpec::with_all_sides_boundary(vec![5, 4]).unwrap();
        let field: DgffField<Rat> = dgff_covariance(&grid).unwrap();
        let a = grid.index(&[1, 1]).unwrap();
        let b = grid.index(&[2, 2]).unwrap();
        let c = grid.index(&[3, 1]).unwrap();
        for points in [vec![a], vec![a, b], vec![a, b, c], vec![a, a, b]] {
            assert_eq!(
                field.gradient_squared_cumulant(&points).unwrap(),
                field.gradient_squared_cumulant_isserlis(&points).unwrap(),
            );
        }
        // boundary point is rejected
        assert!(field.gradient_squared_cumulant(&[0]).is_err());
    }

    #[test]
    fn squared_field_cumulant_matches_isserlis() {
        let grid = GridSpec::with_all_sides_boundary(vec![5, 4]).unwrap();
        let field: DgffField<Rat> = dgff_covariance(&grid).unwrap();
        let a = grid.index(&[1, 1]).unwrap();
        let b = grid.index(&[2, 2]).unwrap();
        let c = grid.index(&[3, 1]).unwrap();
        for points in [vec![a], vec![a, b], vec![a, b, c]] {
            let k = points.len();
            let expected = joint_cumulant(k, |block: &[usize]| {
                let doubled: Vec<usize> = block.iter().flat_map(|&i| [i, i]).collect();
                let g = Matrix::from_fn(k, k, |x, y| field.covariance(points[x], points[y]));
                isserlis_moment(&g, &doubled)
            })
            .unwrap();
            assert_eq!(field.squared_field_cumulant(&points).unwrap(), expected);
        }
    }

    #[test]
    fn mgf_duality_from_negated_cumulants() {
        let mut rng = StdRng::seed_from_u64(99);
        let dims = 2;
        let max_deg = 4;
        let mut table: HashMap<Vec<u8>, Rat> = HashMap::new();
        for a in 0..=max_deg as u8 {
            for b in 0..=max_deg as u8 {
                if (1..=max_deg).contains(&((a + b) as usize)) {
                    table.insert(
                        vec![a, b],
                        Rat::from_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=4)),
                    );
                }
            }
        }
        let f = mgf_from_cumulants(dims, max_deg, &|m: &[u8]| table[m].clone()).unwrap();
        let g = mgf_from_cumulants(dims, max_deg, &|m: &[u8]| -table[m].clone()).unwrap();
        let product = f.mul(&g).unwrap().truncate(max_deg);
        assert_eq!(product, Polynomial::one(dims));
    }

    #[test]
    fn table_emission() {
        let grid = GridSpec::with_all_sides_boundary(vec![4, 4]).unwrap();
        let field: DgffField<Rat> = dgff_covariance(&grid).unwrap();
        let a = grid.index(&[1, 1]).unwrap();
        let b = grid.index(&[2, 1]).unwrap();
        let table = gradient_squared_table(&field, &[a, b], 2).unwrap();
        assert_eq!(table.lattice, vec![4, 4]);
        // arity 1: two rows; arity 2: three non-decreasing tuples
        assert_eq!(table.rows.len(), 5);
        let tsv = table.to_tsv();
        assert!(tsv.starts_with("k\tpoints\tvalue\n"));
        assert!(serde_json::to_string(&table).is_ok());
    }
}
