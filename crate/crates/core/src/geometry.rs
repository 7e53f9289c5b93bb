//! The projection `π_a`, point samples of the sub-self-affine set `E_K`,
//! box counting, and geometric sanity checks on samples.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, symmetric_eigenvalues, Matrix};
use crate::numeric::least_squares;
use crate::symbolic::Letter;
use crate::system::MatrixSystem;

const RANK_TOL: f64 = 1e-8;

/// Affine maps `x ↦ A_i x + a_i`, one per letter of the paired subshift.
#[derive(Clone, Debug)]
pub struct AffineIfs {
    system: MatrixSystem,
    translations: Vec<Vec<f64>>,
    alpha_bar: f64,
    r0: f64,
}

impl AffineIfs {
    pub fn new(system: MatrixSystem, translations: Vec<Vec<f64>>) -> Result<Self> {
        if translations.len() != system.alphabet() {
            return Err(Error::DimensionMismatch {
                expected: system.alphabet(),
                found: translations.len(),
            });
        }
        for a in &translations {
            if a.len() != system.dim() {
                return Err(Error::DimensionMismatch {
                    expected: system.dim(),
                    found: a.len(),
                });
            }
        }
        system.check_contractive()?;
        let alpha_bar = system
            .matrices()
            .iter()
            .map(operator_norm)
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let max_norm = translations.iter().map(|a| norm(a)).fold(0.0, f64::max);
        Ok(AffineIfs {
            system,
            translations,
            alpha_bar,
            r0: max_norm / (1.0 - alpha_bar),
        })
    }

    pub fn system(&self) -> &MatrixSystem {
        &self.system
    }

    pub fn translations(&self) -> &[Vec<f64>] {
        &self.translations
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// `ᾱ = max_i ‖A_i‖`.
    pub fn alpha_bar(&self) -> f64 {
        self.alpha_bar
    }

    /// Radius of a ball about the origin containing the attractor.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// `ᾱⁿ R₀`, the distance from a depth-`n` sample to the set.
    pub fn resolution(&self, n: usize) -> f64 {
        self.alpha_bar.powi(n as i32) * self.r0
    }

    /// `A_i x + a_i`.
    pub fn apply(&self, i: Letter, x: &[f64]) -> Vec<f64> {
        let mut y = self.system.matrices()[i].mul_vec(x);
        for (yk, ak) in y.iter_mut().zip(&self.translations[i]) {
            *yk += ak;
        }
        y
    }

    /// `Σ_{k≤|w|} A_{w|k−1} a_{w_k}`, the image of the origin under `f_w`.
    pub fn project(&self, w: &[Letter]) -> Result<Vec<f64>> {
        if w.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot project the empty word".into(),
            ));
        }
        let d = self.dim();
        if let Some(&l) = w.iter().find(|&&l| l >= self.system.alphabet()) {
            return Err(Error::LetterOutOfRange {
                letter: l,
                alphabet: self.system.alphabet(),
            });
        }
        let mut point = vec![0.0; d];
        let mut product = Matrix::identity(d);
        for &a in w {
            for (p, v) in point.iter_mut().zip(product.mul_vec(&self.translations[a])) {
                *p += v;
            }
            product = product.mul(&self.system.matrices()[a]);
        }
        Ok(point)
    }

    /// Ball containing `π_a([w])`.
    pub fn cylinder_image(&self, w: &[Letter]) -> Result<CylinderImage> {
        let anchor = self.project(w)?;
        let product = crate::linalg::word_product(w, self.system.matrices())?.to_matrix();
        let radius = operator_norm(&product)? * self.r0;
        Ok(CylinderImage {
            word: w.to_vec(),
            anchor,
            radius,
        })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CylinderImage {
    pub word: Vec<Letter>,
    pub anchor: Vec<f64>,
    pub radius: f64,
}

/// Points in `ℝᵈ` stored row-major, with the distance within which they
/// approximate the set they sample.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    resolution: f64,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>, resolution: f64) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not split into dimension {dim}",
                coords.len()
            )));
        }
        Ok(PointCloud {
            dim,
            coords,
            resolution,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean diameter of the bounding box.
    pub fn diameter(&self) -> f64 {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if self.is_empty() {
            return 0.0;
        }
        distance(&lo, &hi)
    }

    /// Applies `x ↦ Qx + b`.
    pub fn transformed(&self, q: &Matrix, b: &[f64]) -> Result<PointCloud> {
        if q.dim() != self.dim || b.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: q.dim(),
            });
        }
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.points() {
            coords.extend(q.mul_vec(p).iter().zip(b).map(|(x, y)| x + y));
        }
        Ok(PointCloud {
            dim: self.dim,
            coords,
            resolution: self.resolution,
        })
    }
}

/// `{π_a(w) : w ∈ K_n}` in lexicographic order of `w`.
pub fn attractor_sample(n: usize, ifs: &AffineIfs) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let system = ifs.system();
    system.budget().check(system.automaton(), n)?;
    let automaton = system.automaton();
    let matrices = system.matrices();
    let d = ifs.dim();
    let parts: Vec<Vec<f64>> = automaton
        .first_letters()
        .into_par_iter()
        .map(|a| {
            let start = (ifs.translations[a].clone(), matrices[a].clone());
            let mut out = Vec::new();
            if n == 1 {
                out.extend_from_slice(&start.0);
                return out;
            }
            automaton.walk_under(
                &[a],
                n,
                start,
                |(p, m), l| {
                    let shifted = m.mul_vec(&ifs.translations[l]);
                    (
                        p.iter().zip(shifted).map(|(x, y)| x + y).collect(),
                        m.mul(&matrices[l]),
                    )
                },
                |w, (p, _)| {
                    if w.len() == n {
                        out.extend_from_slice(p);
                    }
                },
            );
            out
        })
        .collect();
    PointCloud::new(d, parts.concat(), ifs.resolution(n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxCountReport {
    /// Decreasing.
    pub scales: Vec<f64>,
    /// Occupied cells per scale; the geometric mean over grids when
    /// several anchors are used.
    pub counts: Vec<f64>,
    /// Index range `[lo, hi)` of `scales` used in the regression.
    pub window: (usize, usize),
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Placement of the counting grids.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum GridAnchor {
    /// One grid with a vertex at the origin.
    #[default]
    Origin,
    /// One grid with a vertex at the given point.
    At(Vec<f64>),
    /// `log N(ε)` averaged over this many grids, the `j`-th shifted by
    /// `ε·frac(j·g)` with `g` the generalized golden ratios of the dimension.
    Shifted(usize),
}

impl GridAnchor {
    fn offsets(&self, d: usize, eps: f64) -> Vec<Vec<f64>> {
        match self {
            GridAnchor::Origin => vec![vec![0.0; d]],
            GridAnchor::At(p) => vec![p.clone()],
            GridAnchor::Shifted(count) => {
                // root of x^{d+1} = x + 1
                let mut phi = 2.0f64;
                for _ in 0..64 {
                    phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
                }
                let g: Vec<f64> = (1..=d).map(|k| phi.powi(-(k as i32))).collect();
                (0..*count)
                    .map(|j| g.iter().map(|gk| eps * (j as f64 * gk).fract()).collect())
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoxCountOptions {
    /// Defaults to [`default_scales`].
    pub scales: Option<Vec<f64>>,
    /// Defaults to the middle half of the scale list.
    pub window: Option<(usize, usize)>,
    pub anchor: GridAnchor,
}

/// Scales `2⁻ᵏ` within `[4·resolution, diameter]`, decreasing.
pub fn default_scales(cloud: &PointCloud) -> Vec<f64> {
    let lo = 4.0 * cloud.resolution();
    let hi = cloud.diameter();
    (-64..=1074)
        .map(|k: i32| 2f64.powi(-k))
        .skip_while(|&e| e > hi)
        .take_while(|&e| e >= lo && e > 0.0)
        .collect()
}

/// Number of cells of the grid of side `eps` with a vertex at `anchor`
/// that meet the cloud.
pub fn occupied_cells(cloud: &PointCloud, eps: f64, anchor: &[f64]) -> usize {
    let d = cloud.dim();
    let keys: Vec<i64> = cloud
        .coords()
        .iter()
        .enumerate()
        .map(|(i, x)| ((x - anchor[i % d]) / eps).floor() as i64)
        .collect();
    let mut idx: Vec<usize> = (0..cloud.len()).collect();
    let key = |i: usize| &keys[i * d..(i + 1) * d];
    idx.sort_unstable_by(|&a, &b| key(a).cmp(key(b)));
    idx.dedup_by(|a, b| key(*a) == key(*b));
    idx.len()
}

/// Box-counting estimate of the Minkowski dimension: least-squares slope
/// of `log N(ε)` against `log(1/ε)` over the regression window.
pub fn box_count(cloud: &PointCloud, options: &BoxCountOptions) -> Result<BoxCountReport> {
    if cloud.is_empty() {
        return Err(Error::TooFewPoints {
            needed: 1,
            found: 0,
        });
    }
    let d = cloud.dim();
    match &options.anchor {
        GridAnchor::At(p) if p.len() != d => {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        GridAnchor::Shifted(0) => {
            return Err(Error::InvalidArgument(
                "need at least one shifted grid".into(),
            ));
        }
        _ => {}
    }
    let limit = 4.0 * cloud.resolution();
    let mut scales: Vec<f64> = match &options.scales {
        Some(s) => s.clone(),
        None => default_scales(cloud),
    };
    if let Some(&bad) = scales.iter().find(|&&e| !(e >= limit) || e <= 0.0) {
        return Err(Error::ScaleTooFine { scale: bad, limit });
    }
    scales.sort_by(|a, b| b.total_cmp(a));
    scales.dedup();
    let m = scales.len();
    let window = options.window.unwrap_or((m / 4, m - m / 4));
    if window.0 >= window.1 || window.1 > m || window.1 - window.0 < 2 {
        return Err(Error::InvalidArgument(format!(
            "regression window {window:?} needs at least two of {m} scales"
        )));
    }
    let log_counts: Vec<f64> = scales
        .par_iter()
        .map(|&e| {
            let offsets = options.anchor.offsets(d, e);
            let total: f64 = offsets
                .iter()
                .map(|o| (occupied_cells(cloud, e, o) as f64).ln())
                .sum();
            total / offsets.len() as f64
        })
        .collect();
    let x: Vec<f64> = scales[window.0..window.1].iter().map(|e| -e.ln()).collect();
    let (slope, intercept, r_squared) = least_squares(&x, &log_counts[window.0..window.1]);
    let counts = log_counts.iter().map(|l| l.exp()).collect();
    Ok(BoxCountReport {
        scales,
        counts,
        window,
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperplaneReport {
    pub contained: bool,
    pub affine_rank: usize,
    /// Singular values of the centered point matrix, nonincreasing.
    pub singular_values: Vec<f64>,
}

/// Affine rank of the cloud; `contained` when it lies in a hyperplane.
/// Values below `1e−8` times the largest singular value count as zero.
pub fn hyperplane_check(cloud: &PointCloud) -> Result<HyperplaneReport> {
    if cloud.is_empty() {
        return Err(Error::TooFewPoints {
            needed: 1,
            found: 0,
        });
    }
    let d = cloud.dim();
    let n = cloud.len() as f64;
    let mut mean = vec![0.0; d];
    for p in cloud.points() {
        for k in 0..d {
            mean[k] += p[k] / n;
        }
    }
    let mut cov = vec![0.0; d * d];
    for p in cloud.points() {
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] += (p[i] - mean[i]) * (p[j] - mean[j]);
            }
        }
    }
    let singular_values: Vec<f64> = symmetric_eigenvalues(&Matrix::new(d, cov)?)
        .into_iter()
        .map(|e| e.max(0.0).sqrt())
        .collect();
    let top = singular_values[0];
    let affine_rank = if top > 0.0 {
        singular_values
            .iter()
            .filter(|&&s| s > RANK_TOL * top)
            .count()
    } else {
        0
    };
    Ok(HyperplaneReport {
        contained: affine_rank < d,
        affine_rank,
        singular_values,
    })
}

/// Nearest-neighbour index over a fixed point set.
struct KdTree<'a> {
    dim: usize,
    coords: &'a [f64],
    // implicit balanced tree: node at the median of each index range
    order: Vec<usize>,
}

impl<'a> KdTree<'a> {
    fn new(dim: usize, coords: &'a [f64]) -> Self {
        let mut order: Vec<usize> = (0..coords.len() / dim).collect();
        Self::build(dim, coords, &mut order, 0);
        KdTree { dim, coords, order }
    }

    fn build(dim: usize, coords: &[f64], idx: &mut [usize], axis: usize) {
        if idx.len() <= 1 {
            return;
        }
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            coords[a * dim + axis].total_cmp(&coords[b * dim + axis])
        });
        let (left, right) = idx.split_at_mut(mid);
        let next = (axis + 1) % dim;
        Self::build(dim, coords, left, next);
        Self::build(dim, coords, &mut right[1..], next);
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Squared distance to the nearest point.
    fn nearest(&self, q: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        self.search(q, 0, self.order.len(), 0, &mut best);
        best
    }

    fn search(&self, q: &[f64], lo: usize, hi: usize, axis: usize, best: &mut f64) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let p = self.point(self.order[mid]);
        let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
        *best = best.min(d2);
        let diff = q[axis] - p[axis];
        let next = (axis + 1) % self.dim;
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, near.0, near.1, next, best);
        if diff * diff < *best {
            self.search(q, far.0, far.1, next, best);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InclusionReport {
    /// `max_x min_{i,y} |x − (A_i y + a_i)|` over cloud points `x`, `y`.
    pub max_defect: f64,
    /// Index of the point attaining `max_defect`.
    pub worst_point: usize,
    /// `2·resolution`, the defect allowed by sampling alone.
    pub sampling_bound: f64,
}

impl InclusionReport {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.max_defect <= tolerance + self.sampling_bound
    }
}

/// Distance from the cloud to its image under the IFS.
pub fn inclusion_check(cloud: &PointCloud, ifs: &AffineIfs) -> Result<InclusionReport> {
    if cloud.dim() != ifs.dim() {
        return Err(Error::DimensionMismatch {
            expected: ifs.dim(),
            found: cloud.dim(),
        });
    }
    if cloud.is_empty() {
        return Err(Error::TooFewPoints {
            needed: 1,
            found: 0,
        });
    }
    let mut images = Vec::with_capacity(cloud.coords().len() * ifs.system().alphabet());
    for i in 0..ifs.system().alphabet() {
        for y in cloud.points() {
            images.extend(ifs.apply(i, y));
        }
    }
    let tree = KdTree::new(cloud.dim(), &images);
    let defects: Vec<f64> = cloud
        .coords()
        .par_chunks_exact(cloud.dim())
        .map(|x| tree.nearest(x).sqrt())
        .collect();
    let (worst_point, max_defect) = defects
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(InclusionReport {
        max_defect,
        worst_point,
        sampling_bound: 2.0 * cloud.resolution(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::SubshiftSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn not_unique() -> AffineIfs {
        let sys = MatrixSystem::full_shift(vec![
            Matrix::diagonal(&[0.5, 0.25]),
            Matrix::diagonal(&[0.25, 0.5]),
        ])
        .unwrap();
        AffineIfs::new(sys, vec![vec![0.0, 0.0], vec![0.75, 0.5]]).unwrap()
    }

    fn cantor() -> AffineIfs {
        let m = Matrix::diagonal(&[1.0 / 3.0]);
        AffineIfs::new(
            MatrixSystem::full_shift(vec![m.clone(), m]).unwrap(),
            vec![vec![0.0], vec![2.0 / 3.0]],
        )
        .unwrap()
    }

    #[test]
    fn projections_converge_to_fixed_points() {
        let ifs = not_unique();
        let zeros = ifs.project(&[0; 60]).unwrap();
        assert!(norm(&zeros) < 1e-15);
        let ones = ifs.project(&[1; 60]).unwrap();
        assert!(distance(&ones, &[1.0, 1.0]) < 1e-12);
        assert!(ifs.project(&[]).is_err());
        assert_eq!(ifs.project(&[1]).unwrap(), vec![0.75, 0.5]);
    }

    #[test]
    fn rejects_non_contractive() {
        let sys = MatrixSystem::full_shift(vec![
            Matrix::diagonal(&[1.01, 0.5]),
            Matrix::diagonal(&[0.5, 0.5]),
        ])
        .unwrap();
        assert!(matches!(
            AffineIfs::new(sys, vec![vec![0.0; 2]; 2]),
            Err(Error::NonContractive { map: 0, .. })
        ));
    }

    #[test]
    fn cantor_sample_gaps() {
        let ifs = cantor();
        let cloud = attractor_sample(10, &ifs).unwrap();
        assert_eq!(cloud.len(), 1024);
        let xs: Vec<f64> = cloud.points().map(|p| p[0]).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        // gaps between consecutive left endpoints are 2·3⁻¹⁰ or bigger, each
        // a multiple of 3⁻¹⁰
        let unit = 3f64.powi(-10);
        for w in xs.windows(2) {
            let g = (w[1] - w[0]) / unit;
            assert!((g - g.round()).abs() < 1e-6 && g.round() >= 2.0);
        }
        let big = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        assert!((big - (1.0 / 3.0 + unit)).abs() < 1e-12);
    }

    #[test]
    fn sample_order_matches_projection() {
        let ifs = not_unique();
        let cloud = attractor_sample(6, &ifs).unwrap();
        for (w, p) in ifs.system().automaton().words(6).zip(cloud.points()) {
            assert!(distance(&ifs.project(w.letters()).unwrap(), p) < 1e-15);
        }
    }

    #[test]
    fn two_point_subshift() {
        let spec =
            SubshiftSpec::new(2, vec!["01".parse().unwrap(), "10".parse().unwrap()]).unwrap();
        let sys = MatrixSystem::new(spec, not_unique().system().matrices().to_vec()).unwrap();
        let ifs = AffineIfs::new(sys, vec![vec![0.0, 0.0], vec![0.75, 0.5]]).unwrap();
        for n in [1, 5, 30] {
            let cloud = attractor_sample(n, &ifs).unwrap();
            assert_eq!(cloud.len(), 2);
        }
        let cloud = attractor_sample(40, &ifs).unwrap();
        assert!(norm(cloud.point(0)) < 1e-12 && distance(cloud.point(1), &[1.0, 1.0]) < 1e-11);
        let inc = inclusion_check(&cloud, &ifs).unwrap();
        assert!(inc.max_defect < 1e-11);
    }

    #[test]
    fn cylinder_nesting_and_decay() {
        let ifs = not_unique();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=12);
            let w: Vec<Letter> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let parent = ifs.cylinder_image(&w).unwrap();
            let mut child_word = w.clone();
            child_word.push(rng.gen_range(0..2));
            let child = ifs.cylinder_image(&child_word).unwrap();
            assert!(
                distance(&child.anchor, &parent.anchor) + child.radius
                    <= 3.0 * parent.radius + 1e-12
            );
            assert!(parent.radius <= ifs.resolution(n) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn cantor_and_square_slopes() {
        let cloud = attractor_sample(14, &cantor()).unwrap();
        let r = box_count(&cloud, &BoxCountOptions::default()).unwrap();
        assert!(
            (r.slope - 2f64.ln() / 3f64.ln()).abs() < 0.05,
            "{}",
            r.slope
        );
        assert!(r.counts.windows(2).all(|c| c[0] <= c[1]));

        let half = Matrix::diagonal(&[0.5, 0.5]);
        let sys = MatrixSystem::full_shift(vec![half; 4]).unwrap();
        let corners = vec![
            vec![0.0, 0.0],
            vec![0.5, 0.0],
            vec![0.0, 0.5],
            vec![0.5, 0.5],
        ];
        let cloud = attractor_sample(8, &AffineIfs::new(sys, corners).unwrap()).unwrap();
        let r = box_count(&cloud, &BoxCountOptions::default()).unwrap();
        assert!((r.slope - 2.0).abs() < 0.1);
    }

    #[test]
    fn box_count_rejects_fine_scales() {
        let cloud = attractor_sample(6, &cantor()).unwrap();
        assert!(matches!(
            box_count(
                &cloud,
                &BoxCountOptions {
                    scales: Some(vec![0.5, 1e-6]),
                    ..Default::default()
                }
            ),
            Err(Error::ScaleTooFine { .. })
        ));
    }

    #[test]
    fn grid_anchor_options() {
        let cloud = attractor_sample(6, &cantor()).unwrap();
        let shifted = BoxCountOptions {
            anchor: GridAnchor::Shifted(0),
            ..Default::default()
        };
        assert!(box_count(&cloud, &shifted).is_err());
        let wrong = BoxCountOptions {
            anchor: GridAnchor::At(vec![0.0, 0.0]),
            ..Default::default()
        };
        assert!(matches!(
            box_count(&cloud, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
        // one shifted grid is the origin grid
        let one = BoxCountOptions {
            anchor: GridAnchor::Shifted(1),
            ..Default::default()
        };
        let origin = box_count(&cloud, &BoxCountOptions::default()).unwrap();
        assert_eq!(box_count(&cloud, &one).unwrap(), origin);
        // a unit point straddles no cell boundary when anchored half a cell away
        let point = PointCloud::new(1, vec![0.5], 0.0).unwrap();
        assert_eq!(occupied_cells(&point, 1.0, &[0.0]), 1);
        assert_eq!(occupied_cells(&point, 0.25, &[0.125]), 1);
    }

    #[test]
    fn slope_stable_under_rigid_motion() {
        let cloud = attractor_sample(14, &not_unique()).unwrap();
        let base = box_count(&cloud, &BoxCountOptions::default())
            .unwrap()
            .slope;
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let q = Matrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
        let moved = cloud.transformed(&q, &[0.3, -0.2]).unwrap();
        let slope = box_count(&moved, &BoxCountOptions::default())
            .unwrap()
            .slope;
        assert!((slope - base).abs() < 0.1, "{base} {slope}");
    }

    #[test]
    fn hyperplane_ranks() {
        let r = hyperplane_check(&attractor_sample(8, &not_unique()).unwrap()).unwrap();
        assert_eq!((r.contained, r.affine_rank), (false, 2));
        let single = PointCloud::new(2, vec![0.3, 0.4], 0.0).unwrap();
        assert_eq!(hyperplane_check(&single).unwrap().affine_rank, 0);
        let line = PointCloud::new(
            2,
            (0..50).flat_map(|i| [i as f64, 1.0 - i as f64]).collect(),
            0.0,
        )
        .unwrap();
        assert_eq!(hyperplane_check(&line).unwrap().affine_rank, 1);
        assert!(hyperplane_check(&PointCloud::new(2, vec![], 0.0).unwrap()).is_err());
    }

    #[test]
    fn inclusion_detects_outlier() {
        let ifs = not_unique();
        let cloud = attractor_sample(10, &ifs).unwrap();
        let ok = inclusion_check(&cloud, &ifs).unwrap();
        assert!(ok.holds(0.0), "{ok:?}");
        let mut coords = cloud.coords().to_vec();
        // distance 1 from the set; its own image under A_0 is 3/4 away
        coords.extend([0.0, -1.0]);
        let bad = PointCloud::new(2, coords, cloud.resolution()).unwrap();
        let r = inclusion_check(&bad, &ifs).unwrap();
        assert_eq!(r.worst_point, cloud.len());
        assert!((r.max_defect - 0.75).abs() < 1e-12 && !r.holds(0.0));
    }

    #[test]
    fn kd_tree_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<f64> = (0..600).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let tree = KdTree::new(3, &pts);
        for _ in 0..100 {
            let q: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let brute = pts
                .chunks_exact(3)
                .map(|p| {
                    p.iter()
                        .zip(&q)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            assert_eq!(tree.nearest(&q), brute);
        }
    }
}
