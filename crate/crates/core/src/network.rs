//! Layer operators `U_n[λ]f = R^{d/2} (M(f ∗ g_λ))(R·)`, path propagation,
//! the truncated feature extractor `Φ_Ω`, and the feature-space norm.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::frames::{bessel_bound, FilterBank};
use crate::signal::{subsample, Complex64, Grid, Signal, SpectralInput};

/// Slack on `max{B, B·L²} ≤ 1` absorbing round-off in the Bessel bound.
pub const ADMISSIBILITY_SLACK: f64 = 1e-12;

/// Pointwise non-linearities with `M(0) = 0`. Real-valued maps act on the
/// real and imaginary parts separately, which keeps their scalar Lipschitz
/// constant in the complex modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    Modulus,
    Relu,
    Tanh,
    /// `σ(x) − σ(0)` with the logistic sigmoid σ.
    ShiftedSigmoid,
    Identity,
}

impl Nonlinearity {
    pub const ALL: [Nonlinearity; 5] = [
        Nonlinearity::Modulus,
        Nonlinearity::Relu,
        Nonlinearity::Tanh,
        Nonlinearity::ShiftedSigmoid,
        Nonlinearity::Identity,
    ];

    pub fn lipschitz(self) -> f64 {
        match self {
            Nonlinearity::ShiftedSigmoid => 0.25,
            _ => 1.0,
        }
    }

    #[inline]
    pub fn apply_scalar(self, z: Complex64) -> Complex64 {
        fn sig(x: f64) -> f64 {
            // σ(x) − 1/2 = tanh(x/2)/2, exact at 0 and free of cancellation
            0.5 * (0.5 * x).tanh()
        }
        match self {
            Nonlinearity::Modulus => Complex64::new(z.norm(), 0.0),
            Nonlinearity::Relu => Complex64::new(z.re.max(0.0), z.im.max(0.0)),
            Nonlinearity::Tanh => Complex64::new(z.re.tanh(), z.im.tanh()),
            Nonlinearity::ShiftedSigmoid => Complex64::new(sig(z.re), sig(z.im)),
            Nonlinearity::Identity => z,
        }
    }

    pub fn apply(self, f: &Signal) -> Signal {
        if self == Nonlinearity::Identity {
            return f.clone();
        }
        f.map(|z| self.apply_scalar(z))
    }
}

/// One layer `(Ψ_n, M_n, R_n)`.
#[derive(Clone, Debug)]
pub struct Module {
    bank: FilterBank,
    nonlinearity: Nonlinearity,
    subsampling: usize,
    output_grid: Grid,
}

impl Module {
    pub fn new(bank: FilterBank, nonlinearity: Nonlinearity, subsampling: usize) -> Result<Module> {
        let output_grid = bank.grid().dilated(subsampling)?;
        Ok(Module {
            bank,
            nonlinearity,
            subsampling,
            output_grid,
        })
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn subsampling(&self) -> usize {
        self.subsampling
    }

    pub fn input_grid(&self) -> &Grid {
        self.bank.grid()
    }

    /// Grid of the signals this module propagates to the next layer.
    pub fn output_grid(&self) -> &Grid {
        &self.output_grid
    }

    /// `max{B, B·L²}` of this module.
    pub fn admissibility_value(&self) -> f64 {
        bessel_bound(&self.bank) * self.nonlinearity.lipschitz().powi(2).max(1.0)
    }

    fn propagate(&self, input: &SpectralInput<'_>, label: usize) -> Result<Signal> {
        let atom = self.bank.atom(label)?;
        let filtered = atom.kernel().apply_to(input)?;
        subsample(&self.nonlinearity.apply(&filtered), self.subsampling)
    }

    fn output(&self, input: &SpectralInput<'_>) -> Result<Signal> {
        self.bank.output_atom().kernel().apply_to(input)
    }
}

/// `U[λ]f` for a single module and propagation label.
pub fn propagate_one(module: &Module, f: &Signal, label: usize) -> Result<Signal> {
    module.propagate(&SpectralInput::new(f), label)
}

/// Depth-truncated module-sequence.
///
/// Module `n` carries the output atom χ_n and the propagation atoms that
/// map layer `n` to layer `n+1`, so a sequence of depth `N` needs `N + 1`
/// modules (the propagation atoms of the last one are unused).
#[derive(Clone, Debug)]
pub struct ModuleSequence {
    modules: Vec<Module>,
    max_depth: usize,
}

impl ModuleSequence {
    pub fn new(modules: Vec<Module>, max_depth: usize) -> Result<ModuleSequence> {
        if modules.len() < max_depth + 1 {
            return Err(Error::Config(format!(
                "depth {max_depth} needs {} modules, got {}",
                max_depth + 1,
                modules.len()
            )));
        }
        for (n, pair) in modules.windows(2).enumerate().take(max_depth) {
            if pair[0].output_grid() != pair[1].input_grid() {
                return Err(Error::GridMismatch(format!(
                    "module {} outputs {:?} but module {} expects {:?}",
                    n,
                    pair[0].output_grid().extents(),
                    n + 1,
                    pair[1].input_grid().extents()
                )));
            }
        }
        Ok(ModuleSequence { modules, max_depth })
    }

    /// The identity extractor: a single δ output atom, depth 0.
    pub fn identity(grid: &Grid) -> Result<ModuleSequence> {
        let bank = crate::frames::delta_bank(grid)?;
        ModuleSequence::new(vec![Module::new(bank, Nonlinearity::Identity, 1)?], 0)
    }

    pub fn modules(&self) -> &[Module] {
        &self.modules[..=self.max_depth]
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn input_grid(&self) -> &Grid {
        self.modules[0].input_grid()
    }

    /// Same modules, shallower truncation.
    pub fn truncated(&self, depth: usize) -> Result<ModuleSequence> {
        if depth > self.max_depth {
            return Err(Error::Config(format!(
                "cannot deepen a depth-{} sequence to {depth}",
                self.max_depth
            )));
        }
        Ok(ModuleSequence {
            modules: self.modules[..=depth].to_vec(),
            max_depth: depth,
        })
    }

    /// Checks `max{B_n, B_n L_n²} ≤ 1` for every module in use.
    pub fn check_admissible(&self) -> Result<()> {
        for (layer, m) in self.modules().iter().enumerate() {
            let value = m.admissibility_value();
            if value > 1.0 + ADMISSIBILITY_SLACK {
                return Err(Error::Inadmissible { layer, value });
            }
        }
        Ok(())
    }

    /// Total number of features `Σ_{n≤N} Π_{k<n} |Λ_k|`.
    pub fn feature_count(&self) -> usize {
        let mut total = 0;
        let mut paths = 1;
        for (n, m) in self.modules().iter().enumerate() {
            total += paths;
            if n < self.max_depth {
                paths *= m.bank().atoms().len();
            }
        }
        total
    }
}

/// Index path `q = (λ₁, …, λ_n)`; the empty path is `e`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn empty() -> Path {
        Path(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn child(&self, label: usize) -> Path {
        let mut v = self.0.clone();
        v.push(label);
        Path(v)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Feature {
    pub path: Path,
    pub signal: Signal,
}

/// `Φ_Ω(f)` organized by layer; within a layer features are sorted by path.
#[derive(Clone, Debug)]
pub struct FeatureCollection {
    layers: Vec<Vec<Feature>>,
    internal: Option<Vec<Vec<Feature>>>,
    propagated_energy: f64,
}

impl FeatureCollection {
    pub fn layers(&self) -> &[Vec<Feature>] {
        &self.layers
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Feature)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(n, l)| l.iter().map(move |f| (n, f)))
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Retained `U[q]f` per layer, when requested.
    pub fn internal(&self) -> Option<&[Vec<Feature>]> {
        self.internal.as_deref()
    }

    /// `Σ_{|q| = N} ‖U[q]f‖₂²`: an upper bound on the energy of all features
    /// beyond the truncation depth for admissible sequences.
    pub fn propagated_energy(&self) -> f64 {
        self.propagated_energy
    }

    pub fn norm_sq(&self) -> f64 {
        self.iter().map(|(_, f)| f.signal.l2_norm_sq()).sum()
    }

    /// `|||Φ_Ω(f)|||`.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ExtractOptions {
    pub execution: Execution,
    pub retain_internal: bool,
}

pub fn extract_features(
    seq: &ModuleSequence,
    f: &Signal,
    execution: Execution,
) -> Result<FeatureCollection> {
    extract_features_with(
        seq,
        f,
        ExtractOptions {
            execution,
            retain_internal: false,
        },
    )
}

/// Breadth-first evaluation of `(U[q]f) ∗ χ_n` for all paths up to the
/// truncation depth. Sibling paths (and the atoms of one node) are
/// evaluated concurrently; the result does not depend on scheduling.
pub fn extract_features_with(
    seq: &ModuleSequence,
    f: &Signal,
    opts: ExtractOptions,
) -> Result<FeatureCollection> {
    seq.input_grid().ensure_same(f.grid())?;
    let exec = opts.execution;
    let mut nodes = vec![Feature {
        path: Path::empty(),
        signal: f.clone(),
    }];
    let mut layers = Vec::with_capacity(seq.max_depth + 1);
    let mut internal = opts.retain_internal.then(Vec::new);
    for (n, module) in seq.modules().iter().enumerate() {
        let last = n == seq.max_depth;
        let inputs: Vec<SpectralInput<'_>> = nodes
            .iter()
            .map(|q| SpectralInput::new(&q.signal))
            .collect();
        let fanout = if last { 0 } else { module.bank().atoms().len() };
        // task t: node t / (fanout + 1); slot 0 is the output atom
        let results = exec.map_range(nodes.len() * (fanout + 1), |t| {
            let (node, slot) = (t / (fanout + 1), t % (fanout + 1));
            if slot == 0 {
                module.output(&inputs[node])
            } else {
                module.propagate(&inputs[node], slot - 1)
            }
        });
        drop(inputs);
        let mut outputs = Vec::with_capacity(nodes.len());
        let mut children = Vec::with_capacity(nodes.len() * fanout);
        for (t, r) in results.into_iter().enumerate() {
            let (node, slot) = (t / (fanout + 1), t % (fanout + 1));
            let signal = r?;
            if slot == 0 {
                outputs.push(Feature {
                    path: nodes[node].path.clone(),
                    signal,
                });
            } else {
                children.push(Feature {
                    path: nodes[node].path.child(slot - 1),
                    signal,
                });
            }
        }
        layers.push(outputs);
        if last {
            break;
        }
        let parents = std::mem::replace(&mut nodes, children);
        if let Some(internal) = internal.as_mut() {
            internal.push(parents);
        }
    }
    let propagated_energy = nodes.iter().map(|q| q.signal.l2_norm_sq()).sum();
    if let Some(internal) = internal.as_mut() {
        internal.push(nodes);
    }
    Ok(FeatureCollection {
        layers,
        internal,
        propagated_energy,
    })
}

fn check_structure(a: &FeatureCollection, b: &FeatureCollection) -> Result<()> {
    if a.layers.len() != b.layers.len() {
        return Err(Error::StructureMismatch(format!(
            "{} vs {} layers",
            a.layers.len(),
            b.layers.len()
        )));
    }
    for (n, (la, lb)) in a.layers.iter().zip(&b.layers).enumerate() {
        if la.len() != lb.len() {
            return Err(Error::StructureMismatch(format!(
                "layer {n}: {} vs {} features",
                la.len(),
                lb.len()
            )));
        }
        for (fa, fb) in la.iter().zip(lb) {
            if fa.path != fb.path || fa.signal.grid() != fb.signal.grid() {
                return Err(Error::StructureMismatch(format!(
                    "layer {n}: path {} vs {}",
                    fa.path, fb.path
                )));
            }
        }
    }
    Ok(())
}

/// Squared feature distance per layer.
pub fn layer_distances_sq(a: &FeatureCollection, b: &FeatureCollection) -> Result<Vec<f64>> {
    check_structure(a, b)?;
    a.layers
        .iter()
        .zip(&b.layers)
        .map(|(la, lb)| {
            la.iter()
                .zip(lb)
                .map(|(fa, fb)| fa.signal.distance_sq(&fb.signal))
                .sum()
        })
        .collect()
}

/// `|||A − B||| = (Σ_{n,q} ‖A[q] − B[q]‖₂²)^{1/2}`, accumulated over the
/// flat feature list in path order.
pub fn feature_distance(a: &FeatureCollection, b: &FeatureCollection) -> Result<f64> {
    check_structure(a, b)?;
    let mut acc = 0.0;
    for ((_, fa), (_, fb)) in a.iter().zip(b.iter()) {
        acc += fa.signal.distance_sq(&fb.signal)?;
    }
    Ok(acc.sqrt())
}

/// `|||Φ(f) − Φ(h)||| / ‖f − h‖₂` for an admissible sequence.
pub fn contractivity_ratio(
    seq: &ModuleSequence,
    f: &Signal,
    h: &Signal,
    execution: Execution,
) -> Result<f64> {
    seq.check_admissible()?;
    let input = f.distance(h)?;
    if input == 0.0 {
        return Err(Error::IdenticalSignals);
    }
    let a = extract_features(seq, f, execution)?;
    let b = extract_features(seq, h, execution)?;
    Ok(feature_distance(&a, &b)? / input)
}
