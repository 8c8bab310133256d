//! P1 finite elements for `(Δ + q)u = 0` with Neumann data supported on `Γ̃`,
//! and Neumann-to-Dirichlet matrices on `Γ̃`.
//!
//! Weak form: `∫∇u·∇w − ∫q u w = ∫_{Γ̃} f w`. For `q ≡ 0` the constants are
//! removed by pinning one interior node, making the load compatible and
//! projecting the boundary trace to mean zero.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::DMatrix;

use crate::domain::mesh::signed_area;
use crate::linalg::{sigma_min_estimate, BandLu, SparseMatrix};
use crate::quadrature::gauss_legendre_on;
use crate::{BoundaryArc, Domain, Error, Mesh, Result, C64};

/// Analytic potential profiles.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Zero,
    Constant(f64),
    /// `A·exp(−|x − c|²/(2w²))`.
    Gaussian { amplitude: f64, width: f64, center: [f64; 2] },
    /// `A·exp(1 − 1/(1 − |x − c|²/R²))` inside the disk of radius `R`, zero outside.
    Bump { amplitude: f64, radius: f64, center: [f64; 2] },
}

impl Profile {
    pub fn eval(&self, z: C64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Constant(c) => c,
            Profile::Gaussian { amplitude, width, center } => {
                let d2 = (z.re - center[0]).powi(2) + (z.im - center[1]).powi(2);
                amplitude * (-d2 / (2.0 * width * width)).exp()
            }
            Profile::Bump { amplitude, radius, center } => {
                let s = ((z.re - center[0]).powi(2) + (z.im - center[1]).powi(2)) / (radius * radius);
                if s >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Profile::Zero => true,
            Profile::Constant(c) => c == 0.0,
            Profile::Gaussian { amplitude, .. } | Profile::Bump { amplitude, .. } => amplitude == 0.0,
        }
    }

    /// Parses `zero`, `constant:c`, `gaussian:amp,width,cx,cy` or `bump:amp,radius,cx,cy`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = text.split_once(':').unwrap_or((text, ""));
        let nums: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad number '{t}' in profile '{text}'"))))
                .collect::<Result<_>>()?
        };
        let want = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("profile '{name}' takes {n} parameters, got {}", nums.len())))
            }
        };
        let p = match name {
            "zero" => {
                want(0)?;
                Profile::Zero
            }
            "constant" => {
                want(1)?;
                Profile::Constant(nums[0])
            }
            "gaussian" => {
                want(4)?;
                Profile::Gaussian { amplitude: nums[0], width: nums[1], center: [nums[2], nums[3]] }
            }
            "bump" => {
                want(4)?;
                Profile::Bump { amplitude: nums[0], radius: nums[1], center: [nums[2], nums[3]] }
            }
            _ => return Err(Error::Parse(format!("unknown profile '{name}'"))),
        };
        if let Profile::Gaussian { width: s, .. } | Profile::Bump { radius: s, .. } = p {
            if !(s > 0.0) {
                return Err(Error::Parse(format!("profile '{name}' needs a positive length scale")));
            }
        }
        Ok(p)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "zero"),
            Profile::Constant(c) => write!(f, "constant:{c}"),
            Profile::Gaussian { amplitude, width, center } => {
                write!(f, "gaussian:{amplitude},{width},{},{}", center[0], center[1])
            }
            Profile::Bump { amplitude, radius, center } => write!(f, "bump:{amplitude},{radius},{},{}", center[0], center[1]),
        }
    }
}

/// Potential `q` sampled at mesh nodes, optionally backed by an analytic profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    profile: Option<Profile>,
    nodal: Vec<f64>,
}

impl Potential {
    pub fn from_profile(profile: Profile, mesh: &Mesh) -> Self {
        let nodal = mesh.nodes().iter().map(|p| profile.eval(C64::new(p[0], p[1]))).collect();
        Self { profile: Some(profile), nodal }
    }

    pub fn from_nodal(nodal: Vec<f64>) -> Result<Self> {
        if nodal.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("potential"));
        }
        Ok(Self { profile: None, nodal })
    }

    pub fn profile(&self) -> Option<&Profile> {
        self.profile.as_ref()
    }

    pub fn nodal(&self) -> &[f64] {
        &self.nodal
    }

    pub fn is_zero(&self) -> bool {
        self.nodal.iter().all(|v| *v == 0.0)
    }

    /// Value at an arbitrary point; needs an analytic profile.
    pub fn eval(&self, z: C64) -> Result<f64> {
        self.profile
            .as_ref()
            .map(|p| p.eval(z))
            .ok_or_else(|| Error::Precondition("potential has no analytic profile".into()))
    }
}

/// Finite-element solution with its boundary trace.
#[derive(Clone, Debug)]
pub struct FieldSolution {
    pub nodal: Vec<f64>,
    /// Boundary node angles in increasing order and the matching trace values.
    pub theta: Vec<f64>,
    pub trace: Vec<f64>,
}

impl FieldSolution {
    /// Piecewise-linear trace interpolation in the angle.
    pub fn trace_at(&self, theta: f64) -> f64 {
        interpolate_periodic(&self.theta, &self.trace, theta)
    }
}

fn interpolate_periodic(theta: &[f64], values: &[f64], t: f64) -> f64 {
    let n = theta.len();
    let t = t.rem_euclid(TAU);
    let k = theta.partition_point(|v| *v <= t);
    let (i0, i1) = if k == 0 || k == n { (n - 1, 0) } else { (k - 1, k) };
    let (t0, mut t1) = (theta[i0], theta[i1]);
    let mut tt = t;
    if t1 <= t0 {
        t1 += TAU;
        if tt < t0 {
            tt += TAU;
        }
    }
    let s = (tt - t0) / (t1 - t0);
    values[i0] * (1.0 - s) + values[i1] * s
}

const LOAD_GAUSS: usize = 8;

/// Factorised Neumann problem for one potential on one mesh.
#[derive(Clone, Debug)]
pub struct NeumannSolver {
    mesh: Mesh,
    lu: BandLu,
    pinned: Option<usize>,
    /// Lumped boundary weights per node (zero for interior nodes).
    boundary_weight: Vec<f64>,
    /// Boundary nodes sorted by angle, with their angles.
    boundary_sorted: Vec<(f64, usize)>,
    sigma_min: f64,
    norm: f64,
}

impl NeumannSolver {
    pub fn new(mesh: &Mesh, q: &Potential) -> Result<Self> {
        let n = mesh.nodes().len();
        if q.nodal.len() != n {
            return Err(Error::Mismatch(format!("potential has {} values for {n} nodes", q.nodal.len())));
        }
        let mut a = assemble(mesh, &q.nodal);
        let norm = a.norm_inf();
        let pinned = if q.is_zero() {
            let node = (0..n)
                .filter(|i| !mesh.is_boundary(*i))
                .min_by(|i, j| {
                    let (p, r) = (mesh.nodes()[*i], mesh.nodes()[*j]);
                    (p[0].hypot(p[1])).total_cmp(&r[0].hypot(r[1]))
                })
                .ok_or_else(|| Error::Mesh("no interior node to fix the gauge".into()))?;
            a.pin(node);
            Some(node)
        } else {
            None
        };
        let lu = BandLu::factor(&a)?;
        let sigma_min = sigma_min_estimate(&lu, 40);
        if sigma_min < 1e-10 * norm {
            return Err(Error::Singular { sigma_min, norm });
        }
        let mut boundary_weight = vec![0.0; n];
        for (i, j) in mesh.boundary_edges() {
            let (p, r) = (mesh.nodes()[i], mesh.nodes()[j]);
            let len = (p[0] - r[0]).hypot(p[1] - r[1]);
            boundary_weight[i] += 0.5 * len;
            boundary_weight[j] += 0.5 * len;
        }
        let mut boundary_sorted: Vec<(f64, usize)> = mesh
            .boundary_loop()
            .iter()
            .map(|i| {
                let p = mesh.nodes()[*i];
                (p[1].atan2(p[0]).rem_euclid(TAU), *i)
            })
            .collect();
        boundary_sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { mesh: mesh.clone(), lu, pinned, boundary_weight, boundary_sorted, sigma_min, norm })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn matrix_norm(&self) -> f64 {
        self.norm
    }

    /// True when the constant gauge was fixed (`q ≡ 0`).
    pub fn is_gauged(&self) -> bool {
        self.pinned.is_some()
    }

    pub fn boundary_weights(&self) -> &[f64] {
        &self.boundary_weight
    }

    /// Boundary nodes sorted by angle.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        self.boundary_sorted.iter().map(|(_, i)| *i).collect()
    }

    /// Load vector of `f` on `arc`; see [`boundary_load`].
    pub fn load<F: Fn(f64) -> C64>(&self, f: F, arc: &BoundaryArc) -> (Vec<f64>, Vec<f64>) {
        boundary_load(&self.mesh, f, arc)
    }

    /// Solves with a nodal load vector; in the constant gauge the load is made
    /// compatible and the boundary trace projected to mean zero.
    pub fn solve_load(&self, load: &[f64]) -> Vec<f64> {
        let mut b = load.to_vec();
        if let Some(pin) = self.pinned {
            let total: f64 = b.iter().sum();
            let wsum: f64 = self.boundary_weight.iter().sum();
            for (v, w) in b.iter_mut().zip(&self.boundary_weight) {
                *v -= total * w / wsum;
            }
            b[pin] = 0.0;
        }
        let mut u = self.lu.solve(&b);
        if self.pinned.is_some() {
            let mean = self.boundary_mean(&u);
            u.iter_mut().for_each(|v| *v -= mean);
        }
        u
    }

    /// Length-weighted mean of nodal values over the boundary.
    pub fn boundary_mean(&self, u: &[f64]) -> f64 {
        let wsum: f64 = self.boundary_weight.iter().sum();
        u.iter().zip(&self.boundary_weight).map(|(v, w)| v * w).sum::<f64>() / wsum
    }

    pub fn field(&self, nodal: Vec<f64>) -> FieldSolution {
        let theta = self.boundary_sorted.iter().map(|(t, _)| *t).collect();
        let trace = self.boundary_sorted.iter().map(|(_, i)| nodal[*i]).collect();
        FieldSolution { nodal, theta, trace }
    }

    /// Solves with real Neumann data `f` on `arc`, zero elsewhere.
    pub fn solve<F: Fn(f64) -> f64>(&self, f: F, arc: &BoundaryArc) -> FieldSolution {
        let (re, _) = self.load(|t| C64::new(f(t), 0.0), arc);
        self.field(self.solve_load(&re))
    }
}

fn assemble(mesh: &Mesh, q: &[f64]) -> SparseMatrix {
    let nodes = mesh.nodes();
    let mut a = SparseMatrix::new(nodes.len());
    for tri in mesh.triangles() {
        let area = signed_area(nodes, tri);
        let [p0, p1, p2] = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
        let b = [p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]];
        let c = [p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]];
        let qv = [q[tri[0]], q[tri[1]], q[tri[2]]];
        let qsum = qv[0] + qv[1] + qv[2];
        for i in 0..3 {
            for j in 0..3 {
                let k = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
                // ∫ q φ_i φ_j for q linear on the triangle.
                let m = if i == j {
                    area * (qv[i] / 10.0 + (qsum - qv[i]) / 30.0)
                } else {
                    let l = 3 - i - j;
                    area * ((qv[i] + qv[j]) / 30.0 + qv[l] / 60.0)
                };
                a.add(tri[i], tri[j], k - m);
            }
        }
    }
    a
}

/// Load vector `∫ f φ_i ds` over the boundary chords, `f` evaluated at the
/// angle of each chord quadrature point and cut off outside `arc`.
pub fn boundary_load<F: Fn(f64) -> C64>(mesh: &Mesh, f: F, arc: &BoundaryArc) -> (Vec<f64>, Vec<f64>) {
    let n = mesh.nodes().len();
    let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
    let (ts, ws) = gauss_legendre_on(LOAD_GAUSS, 0.0, 1.0);
    for (i, j) in mesh.boundary_edges() {
        let (p, r) = (mesh.nodes()[i], mesh.nodes()[j]);
        let len = (p[0] - r[0]).hypot(p[1] - r[1]);
        for (t, w) in ts.iter().zip(&ws) {
            let x = p[0] + t * (r[0] - p[0]);
            let y = p[1] + t * (r[1] - p[1]);
            let theta = y.atan2(x);
            if !arc.contains(theta) {
                continue;
            }
            let v = f(theta) * (w * len);
            re[i] += (1.0 - t) * v.re;
            re[j] += t * v.re;
            im[i] += (1.0 - t) * v.im;
            im[j] += t * v.im;
        }
    }
    (re, im)
}

/// Solves the Neumann problem for data `f` on the domain's `Γ̃`.
pub fn solve_neumann<F: Fn(f64) -> f64>(q: &Potential, domain: &Domain, f: F) -> Result<FieldSolution> {
    let solver = NeumannSolver::new(domain.mesh(), q)?;
    Ok(solver.solve(f, domain.gamma_tilde()))
}

/// Smallest generalised eigenvalue `μ` of `K u = μ M u` nearest `shift`
/// (stiffness against unit-potential mass), by Rayleigh quotient iteration.
pub fn neumann_eigenvalue_near(mesh: &Mesh, shift: f64) -> Result<f64> {
    let n = mesh.nodes().len();
    let k = assemble(mesh, &vec![0.0; n]);
    let km = assemble(mesh, &vec![1.0; n]);
    // km = K − M, so M = K − km.
    let mass = |x: &[f64]| -> Vec<f64> {
        let a = k.mul_vec(x);
        let b = km.mul_vec(x);
        a.iter().zip(&b).map(|(u, v)| u - v).collect()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let mut x: Vec<f64> = mesh.nodes().iter().map(|p| p[0] + 0.1 * p[1] * p[1]).collect();
    let mut mu = shift;
    for it in 0..12 {
        // Assembling with the constant potential μ gives K − μM.
        let lu = BandLu::factor(&assemble(mesh, &vec![mu; n]))?;
        let y = lu.solve(&mass(&x));
        let norm = dot(&y, &mass(&y)).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        x = y.iter().map(|v| v / norm).collect();
        let new_mu = dot(&x, &k.mul_vec(&x)) / dot(&x, &mass(&x));
        // Fixed-shift inverse iteration first, then Rayleigh quotient updates.
        if it >= 2 {
            let done = (new_mu - mu).abs() <= 1e-15 * new_mu.abs();
            mu = new_mu;
            if done {
                break;
            }
        }
    }
    Ok(mu)
}

/// Data basis on `Γ̃` for Neumann-to-Dirichlet matrices.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryBasis {
    /// `cos(nθ)`, `sin(nθ)` for `n = 1..=modes`, windowed by a cosine taper
    /// over the fraction `taper` of the arc at each end (no taper on the full
    /// circle) and corrected to mean zero on the arc.
    Fourier { arc: BoundaryArc, modes: usize, taper: f64 },
    /// Nodal hat functions of the boundary nodes touching the arc.
    Nodal { arc: BoundaryArc },
}

impl BoundaryBasis {
    pub fn fourier(arc: BoundaryArc, modes: usize) -> Self {
        BoundaryBasis::Fourier { arc, modes, taper: 0.05 }
    }

    pub fn arc(&self) -> &BoundaryArc {
        match self {
            BoundaryBasis::Fourier { arc, .. } | BoundaryBasis::Nodal { arc } => arc,
        }
    }
}

/// Fourier data function `j` (cos for even `j`, sin for odd) with window and
/// mean correction.
struct FourierFunction {
    arc: BoundaryArc,
    freq: f64,
    sine: bool,
    taper: f64,
    mean: f64,
}

impl FourierFunction {
    fn new(arc: BoundaryArc, j: usize, taper: f64) -> Self {
        let mut f = Self { arc, freq: (j / 2 + 1) as f64, sine: j % 2 == 1, taper, mean: 0.0 };
        let (ts, ws) = arc_quadrature(&arc, 2048);
        let num: f64 = ts.iter().zip(&ws).map(|(t, w)| w * f.window(*t) * f.raw(*t)).sum();
        let den: f64 = ts.iter().zip(&ws).map(|(t, w)| w * f.window(*t)).sum();
        f.mean = num / den;
        f
    }

    fn raw(&self, t: f64) -> f64 {
        if self.sine {
            (self.freq * t).sin()
        } else {
            (self.freq * t).cos()
        }
    }

    fn window(&self, t: f64) -> f64 {
        if self.arc.is_full() || self.taper <= 0.0 {
            return 1.0;
        }
        let Some(s) = self.arc.position(t) else { return 0.0 };
        let eps = self.taper;
        let ramp = |x: f64| if x >= eps { 1.0 } else { 0.5 * (1.0 - (PI * x / eps).cos()) };
        ramp(s) * ramp(1.0 - s)
    }

    fn eval(&self, t: f64) -> f64 {
        if !self.arc.is_full() && !self.arc.contains(t) {
            return 0.0;
        }
        self.window(t) * (self.raw(t) - self.mean)
    }
}

fn arc_quadrature(arc: &BoundaryArc, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let h = arc.len() / panels as f64;
    let (gx, gw) = gauss_legendre_on(4, 0.0, h);
    let mut ts = Vec::with_capacity(4 * panels);
    let mut ws = Vec::with_capacity(4 * panels);
    for p in 0..panels {
        for (x, w) in gx.iter().zip(&gw) {
            ts.push(arc.start() + p as f64 * h + x);
            ws.push(*w);
        }
    }
    (ts, ws)
}

/// Neumann-to-Dirichlet matrix on a boundary basis.
#[derive(Clone, Debug)]
pub struct NdMap {
    basis: BoundaryBasis,
    matrix: DMatrix<f64>,
    /// Boundary nodes of the nodal basis (empty for Fourier).
    nodes: Vec<usize>,
    symmetry_defect: f64,
    failure: Option<(usize, String)>,
    mesh_h: f64,
}

impl NdMap {
    pub fn basis(&self) -> &BoundaryBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.symmetry_defect
    }

    pub fn is_solvable(&self) -> bool {
        self.failure.is_none()
    }

    /// Failing basis index and reason when the map could not be assembled.
    pub fn failure(&self) -> Option<&(usize, String)> {
        self.failure.as_ref()
    }

    pub fn mesh_h(&self) -> f64 {
        self.mesh_h
    }

    /// Largest singular value of the matrix.
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }

    /// Whitespace-separated row-major matrix with a `#` metadata header.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# nd-map dim {} mesh_h {} symmetry_defect {:e}\n",
            self.dim(),
            self.mesh_h,
            self.symmetry_defect
        );
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|j| format!("{:.12e}", self.matrix[(i, j)])).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// `‖N − Nᵀ‖_F / ‖N‖_F`.
pub fn nd_symmetry_defect(nd: &NdMap) -> f64 {
    symmetry_defect(&nd.matrix)
}

fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        0.0
    } else {
        (m - m.transpose()).norm() / norm
    }
}

/// Assembles the ND matrix of `q` on the basis, one factorisation reused for
/// every basis function.
pub fn assemble_nd_map(q: &Potential, domain: &Domain, basis: BoundaryBasis) -> NdMap {
    assemble_nd_map_on(q, domain.mesh(), basis)
}

/// As [`assemble_nd_map`] on a bare mesh, for arcs (such as the full circle)
/// that do not come from a partial-data domain.
pub fn assemble_nd_map_on(q: &Potential, mesh: &Mesh, basis: BoundaryBasis) -> NdMap {
    match NeumannSolver::new(mesh, q) {
        Ok(solver) => nd_map_from_solver(&solver, basis),
        Err(e) => NdMap {
            basis,
            matrix: DMatrix::zeros(0, 0),
            nodes: Vec::new(),
            symmetry_defect: 0.0,
            failure: Some((0, e.to_string())),
            mesh_h: mesh.max_edge(),
        },
    }
}

pub fn nd_map_from_solver(solver: &NeumannSolver, basis: BoundaryBasis) -> NdMap {
    let mesh_h = solver.mesh().max_edge();
    let (matrix, nodes) = match &basis {
        BoundaryBasis::Fourier { arc, modes, taper } => {
            let funcs: Vec<FourierFunction> = (0..2 * modes).map(|j| FourierFunction::new(*arc, j, *taper)).collect();
            let fields: Vec<FieldSolution> = funcs.iter().map(|f| solver.solve(|t| f.eval(t), arc)).collect();
            let panels = (8 * solver.boundary_nodes().len()).max(256);
            let (ts, ws) = arc_quadrature(arc, panels);
            let evals: Vec<Vec<f64>> = funcs.iter().map(|f| ts.iter().map(|t| f.eval(*t)).collect()).collect();
            let k = funcs.len();
            let m = DMatrix::from_fn(k, k, |i, j| {
                ts.iter().zip(&ws).enumerate().map(|(p, (t, w))| w * evals[i][p] * fields[j].trace_at(*t)).sum()
            });
            (m, Vec::new())
        }
        BoundaryBasis::Nodal { arc } => {
            let nodes = nodes_touching(solver, arc);
            let n = solver.mesh().nodes().len();
            let cols: Vec<Vec<f64>> = nodes
                .iter()
                .map(|j| {
                    let mut e = vec![0.0; n];
                    e[*j] = 1.0;
                    solver.solve_load(&e)
                })
                .collect();
            let k = nodes.len();
            (DMatrix::from_fn(k, k, |i, j| cols[j][nodes[i]]), nodes)
        }
    };
    let symmetry_defect = symmetry_defect(&matrix);
    NdMap { basis, matrix, nodes, symmetry_defect, failure: None, mesh_h }
}

/// Boundary nodes whose hat function meets the arc (sorted by angle).
pub fn nodes_touching(solver: &NeumannSolver, arc: &BoundaryArc) -> Vec<usize> {
    let mesh = solver.mesh();
    let mut keep = vec![false; mesh.nodes().len()];
    for (i, j) in mesh.boundary_edges() {
        let (p, r) = (mesh.nodes()[i], mesh.nodes()[j]);
        let (ts, _) = gauss_legendre_on(LOAD_GAUSS, 0.0, 1.0);
        if ts.iter().any(|t| arc.contains((p[1] + t * (r[1] - p[1])).atan2(p[0] + t * (r[0] - p[0])))) {
            keep[i] = true;
            keep[j] = true;
        }
    }
    solver.boundary_nodes().into_iter().filter(|i| keep[*i]).collect()
}

/// Relative difference `‖N₁ − N₂‖₂ / ‖N₂‖₂` of two maps on the same basis.
pub fn relative_difference(n1: &NdMap, n2: &NdMap) -> Result<f64> {
    if n1.basis != n2.basis || n1.dim() != n2.dim() || n1.nodes != n2.nodes {
        return Err(Error::Mismatch("ND maps use different bases".into()));
    }
    let denom = n2.spectral_norm().max(n1.spectral_norm());
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(spectral_norm(&(&n1.matrix - &n2.matrix)) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::half_disk_domain;
    use proptest::prelude::*;

    #[test]
    fn cosine_data_gives_scaled_trace() {
        let mesh = Mesh::disk(0.04).unwrap();
        let solver = NeumannSolver::new(&mesh, &Potential::from_profile(Profile::Zero, &mesh)).unwrap();
        for n in [1.0, 3.0] {
            let sol = solver.solve(|t| (n * t).cos(), &BoundaryArc::full());
            let err = sol
                .theta
                .iter()
                .zip(&sol.trace)
                .map(|(t, v)| (v - (n * t).cos() / n).abs())
                .fold(0.0, f64::max);
            assert!(err < 5e-3, "n = {n}: {err}");
        }
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let d = half_disk_domain(0.1, 0.1).unwrap();
        let q = Potential::from_profile(Profile::Gaussian { amplitude: 1.0, width: 0.3, center: [0.2, 0.0] }, d.mesh());
        let sol = solve_neumann(&q, &d, |_| 0.0).unwrap();
        assert!(sol.nodal.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn potential_at_discrete_eigenvalue_is_singular() {
        let d = half_disk_domain(0.1, 0.2).unwrap();
        let mu = neumann_eigenvalue_near(d.mesh(), 3.4).unwrap();
        assert!((mu - 3.39).abs() < 0.2, "{mu}");
        let q = Potential::from_profile(Profile::Constant(mu), d.mesh());
        let e = NeumannSolver::new(d.mesh(), &q).unwrap_err();
        assert!(matches!(e, Error::Singular { .. }), "{e}");
        let nd = assemble_nd_map(&q, &d, BoundaryBasis::fourier(*d.gamma_tilde(), 2));
        assert!(!nd.is_solvable());
        let q_off = Potential::from_profile(Profile::Constant(mu + 0.3), d.mesh());
        assert!(NeumannSolver::new(d.mesh(), &q_off).is_ok());
    }

    #[test]
    fn fourier_nd_map_is_diagonal_on_full_circle() {
        let mesh = Mesh::disk(0.05).unwrap();
        let nd = assemble_nd_map_on(&Potential::from_profile(Profile::Zero, &mesh), &mesh, BoundaryBasis::fourier(BoundaryArc::full(), 3));
        assert!(nd.is_solvable());
        for j in 0..6 {
            let n = (j / 2 + 1) as f64;
            let rel = (nd.matrix()[(j, j)] - PI / n).abs() / (PI / n);
            assert!(rel < 1e-2, "mode {j}: {rel}");
        }
        assert!(nd.symmetry_defect() <= 1e-3);
    }

    #[test]
    fn symmetry_defect_shrinks_under_refinement() {
        let arc = BoundaryArc::new(0.0, PI).unwrap();
        let defect = |h: f64| {
            let d = half_disk_domain(0.1, h).unwrap();
            let q = Potential::from_profile(Profile::Gaussian { amplitude: 1.0, width: 0.3, center: [0.0, 0.2] }, d.mesh());
            assemble_nd_map(&q, &d, BoundaryBasis::fourier(arc, 4)).symmetry_defect()
        };
        let (coarse, fine) = (defect(0.1), defect(0.05));
        assert!(fine < coarse, "{fine} vs {coarse}");
    }

    #[test]
    fn identical_potentials_give_identical_maps() {
        let d = half_disk_domain(0.1, 0.1).unwrap();
        let p = Profile::Bump { amplitude: 2.0, radius: 0.5, center: [0.1, 0.2] };
        let basis = BoundaryBasis::fourier(*d.gamma_tilde(), 3);
        let a = assemble_nd_map(&Potential::from_profile(p.clone(), d.mesh()), &d, basis.clone());
        let b = assemble_nd_map(&Potential::from_profile(p, d.mesh()), &d, basis);
        assert_eq!(a.matrix(), b.matrix());
        assert_eq!(relative_difference(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn nodal_map_is_symmetric_for_nonzero_potential() {
        let d = half_disk_domain(0.1, 0.1).unwrap();
        let q = Potential::from_profile(Profile::Gaussian { amplitude: 1.0, width: 0.3, center: [0.0, 0.0] }, d.mesh());
        let nd = assemble_nd_map(&q, &d, BoundaryBasis::Nodal { arc: *d.gamma_tilde() });
        assert!(nd.dim() > 10);
        assert!(nd.symmetry_defect() < 1e-10);
    }

    #[test]
    fn profile_text_round_trip() {
        for p in [
            Profile::Zero,
            Profile::Constant(-2.5),
            Profile::Gaussian { amplitude: 1.0, width: 0.3, center: [0.2, -0.1] },
            Profile::Bump { amplitude: 0.5, radius: 0.25, center: [0.0, 0.4] },
        ] {
            assert_eq!(Profile::parse(&p.to_string()).unwrap(), p);
        }
        assert!(Profile::parse("gaussian:1,0.3").is_err());
        assert!(Profile::parse("wiggle").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn trace_interpolation_reproduces_nodes(k in 0usize..60) {
            let mesh = Mesh::disk(0.1).unwrap();
            let solver = NeumannSolver::new(&mesh, &Potential::from_profile(Profile::Zero, &mesh)).unwrap();
            let sol = solver.solve(|t| (2.0 * t).sin(), &BoundaryArc::full());
            let i = k % sol.theta.len();
            prop_assert!((sol.trace_at(sol.theta[i]) - sol.trace[i]).abs() < 1e-14);
        }
    }
}
