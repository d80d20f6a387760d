//! Discrete Hopfield network.
//!
//! Patterns are stored with the Hebbian rule `W = (1/N) Σ_k x^k (x^k)^T`
//! followed by `w_ii = 0`. Recall runs the synchronous high-gain update
//! `x ← sgn(W x + I)` where `sgn(0) = 0`, so intermediate states may carry
//! neutral neurons. A run stops when two consecutive states are identical
//! or the iteration cap is reached.

use std::fmt;
use std::ops::Neg;

use crate::error::{Error, Result};

/// Relative tolerance under which a neuron's local field counts as an exact
/// tie. Fields are sums of `N` rounded weights; a genuine nonzero field of a
/// Hebbian network is at least `1/N` in magnitude.
const TIE_TOLERANCE: f64 = 1e-9;

/// Neuron activations over {-1, 0, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BipolarPattern(Vec<i8>);

impl BipolarPattern {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidPattern(format!(
                "length {} is below the minimum of 2",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !matches!(v, -1..=1)) {
            return Err(Error::InvalidPattern(format!(
                "entry {pos} has value {}, expected -1, 0 or +1",
                values[pos]
            )));
        }
        Ok(BipolarPattern(values))
    }

    /// Builds a strictly bipolar pattern: `true` fires (+1), `false` is dormant (-1).
    pub fn from_active(active: &[bool]) -> Result<Self> {
        Self::new(active.iter().map(|&a| if a { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    /// True when no neuron is neutral.
    pub fn is_bipolar(&self) -> bool {
        self.0.iter().all(|&v| v != 0)
    }

    pub fn neutral_count(&self) -> usize {
        self.0.iter().filter(|&&v| v == 0).count()
    }

    pub fn active_count(&self) -> usize {
        self.0.iter().filter(|&&v| v == 1).count()
    }

    /// Normalised dot product `(1/N) x·y`.
    pub fn overlap(&self, other: &BipolarPattern) -> Result<f64> {
        check_dim(self.len(), other.len())?;
        let dot: i64 = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| i64::from(a) * i64::from(b))
            .sum();
        Ok(dot as f64 / self.len() as f64)
    }

    /// One glyph per neuron: `+` fired, `-` dormant, `0` neutral.
    pub fn glyphs(&self) -> String {
        self.0
            .iter()
            .map(|&v| match v {
                1 => '+',
                -1 => '-',
                _ => '0',
            })
            .collect()
    }
}

impl Neg for &BipolarPattern {
    type Output = BipolarPattern;

    fn neg(self) -> BipolarPattern {
        BipolarPattern(self.0.iter().map(|&v| -v).collect())
    }
}

impl Neg for BipolarPattern {
    type Output = BipolarPattern;

    fn neg(self) -> BipolarPattern {
        -&self
    }
}

impl fmt::Display for BipolarPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.glyphs())
    }
}

/// Symmetric connection weights with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    /// Validates symmetry (exact) and the zero diagonal.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidWeights(format!("{n} neurons, need at least 2")));
        }
        if data.len() != n * n {
            return Err(Error::InvalidWeights(format!(
                "{} entries for {n} neurons",
                data.len()
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidWeights(format!("w[{i}][{i}] is nonzero")));
            }
            for j in (i + 1)..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if !a.is_finite() || a != b {
                    return Err(Error::InvalidWeights(format!(
                        "w[{i}][{j}] = {a} but w[{j}][{i}] = {b}"
                    )));
                }
            }
        }
        Ok(WeightMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }
}

/// Parameters of the recall dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub max_iterations: usize,
    /// External input per neuron; `None` means zero bias.
    pub bias: Option<Vec<f64>>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            max_iterations: 100,
            bias: None,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if let Some(bias) = &self.bias {
            check_dim(n, bias.len())?;
            if bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::InvalidConfig("bias must be finite".into()));
            }
        }
        Ok(())
    }

    fn bias_at(&self, i: usize) -> f64 {
        self.bias.as_ref().map_or(0.0, |b| b[i])
    }
}

/// Every state visited by one recall run, with its energy.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTrace {
    pub states: Vec<BipolarPattern>,
    pub energies: Vec<f64>,
    pub converged: bool,
}

impl NetworkTrace {
    pub fn final_state(&self) -> &BipolarPattern {
        self.states.last().expect("trace always holds the initial state")
    }

    /// Number of updates applied.
    pub fn iterations(&self) -> usize {
        self.states.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    Retrieval(usize),
    Reversed(usize),
    Spurious,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchOutcome {
    pub kind: MatchKind,
    /// `max_k |final · stored_k| / N`, for diagnostics only.
    pub overlap: f64,
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn validate_training_set(patterns: &[BipolarPattern]) -> Result<usize> {
    let first = patterns.first().ok_or(Error::EmptyPatternList)?;
    let n = first.len();
    for (index, p) in patterns.iter().enumerate() {
        if p.len() != n {
            return Err(Error::PatternLengthMismatch {
                index,
                expected: n,
                found: p.len(),
            });
        }
        if let Some(neuron) = p.values().iter().position(|&v| v == 0) {
            return Err(Error::ZeroInTrainingPattern { index, neuron });
        }
    }
    Ok(n)
}

/// Unnormalised outer product `X Xᵀ` of a single pattern, diagonal kept.
pub fn raw_outer_product(pattern: &BipolarPattern) -> Vec<Vec<i32>> {
    let v = pattern.values();
    v.iter()
        .map(|&a| v.iter().map(|&b| i32::from(a) * i32::from(b)).collect())
        .collect()
}

/// Hebbian storage of strictly bipolar patterns.
pub fn hebbian_train(patterns: &[BipolarPattern]) -> Result<WeightMatrix> {
    let n = validate_training_set(patterns)?;
    // Integer co-activation counts first, then a single division per entry.
    let mut counts = vec![0i64; n * n];
    for p in patterns {
        let v = p.values();
        for i in 0..n {
            let row = &mut counts[i * n..(i + 1) * n];
            let xi = i64::from(v[i]);
            for (c, &xj) in row.iter_mut().zip(v) {
                *c += xi * i64::from(xj);
            }
        }
    }
    let scale = n as f64;
    let mut data: Vec<f64> = counts.into_iter().map(|c| c as f64 / scale).collect();
    for i in 0..n {
        data[i * n + i] = 0.0;
    }
    Ok(WeightMatrix { n, data })
}

/// `E = -½ Σ_ij w_ij x_i x_j - Σ_i I_i x_i`.
pub fn energy(weights: &WeightMatrix, state: &BipolarPattern, bias: Option<&[f64]>) -> Result<f64> {
    let n = weights.dim();
    check_dim(n, state.len())?;
    if let Some(b) = bias {
        check_dim(n, b.len())?;
    }
    let x = state.values();
    let mut quad = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        let field: f64 = weights
            .row(i)
            .iter()
            .zip(x)
            .map(|(&w, &xj)| w * f64::from(xj))
            .sum();
        quad += f64::from(xi) * field;
    }
    let linear: f64 = bias.map_or(0.0, |b| {
        b.iter().zip(x).map(|(&bi, &xi)| bi * f64::from(xi)).sum()
    });
    Ok(-0.5 * quad - linear)
}

/// One synchronous update of every neuron from the same input state.
pub fn step(
    weights: &WeightMatrix,
    state: &BipolarPattern,
    config: &DynamicsConfig,
) -> Result<BipolarPattern> {
    let n = weights.dim();
    check_dim(n, state.len())?;
    config.validate(n)?;
    Ok(step_unchecked(weights, state, config))
}

fn step_unchecked(weights: &WeightMatrix, state: &BipolarPattern, config: &DynamicsConfig) -> BipolarPattern {
    let x = state.values();
    let next = (0..weights.dim())
        .map(|i| {
            let bias = config.bias_at(i);
            let mut field = bias;
            let mut magnitude = bias.abs();
            for (&w, &xj) in weights.row(i).iter().zip(x) {
                let term = w * f64::from(xj);
                field += term;
                magnitude += term.abs();
            }
            if field.abs() <= TIE_TOLERANCE * magnitude {
                0
            } else if field > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    BipolarPattern(next)
}

/// Iterates [`step`] until a fixed point or `max_iterations` updates.
pub fn run_to_convergence(
    weights: &WeightMatrix,
    initial: &BipolarPattern,
    config: &DynamicsConfig,
) -> Result<NetworkTrace> {
    let n = weights.dim();
    check_dim(n, initial.len())?;
    config.validate(n)?;
    let bias = config.bias.as_deref();

    let mut states = vec![initial.clone()];
    let mut energies = vec![energy(weights, initial, bias)?];
    let mut converged = false;
    for _ in 0..config.max_iterations {
        let current = states.last().expect("nonempty");
        let next = step_unchecked(weights, current, config);
        let same = &next == current;
        energies.push(energy(weights, &next, bias)?);
        states.push(next);
        if same {
            converged = true;
            break;
        }
    }
    Ok(NetworkTrace {
        states,
        energies,
        converged,
    })
}

/// Exact comparison of a final state against the stored patterns. An exact
/// retrieval wins over a reversal, so a stored pattern that happens to be
/// the negation of another still reports as itself.
pub fn match_state(state: &BipolarPattern, stored: &[BipolarPattern]) -> Result<MatchOutcome> {
    let mut overlap: f64 = 0.0;
    for pattern in stored {
        overlap = overlap.max(state.overlap(pattern)?.abs());
    }
    let reversed = |p: &BipolarPattern| state.values().iter().zip(p.values()).all(|(&a, &b)| a == -b);
    let kind = if let Some(k) = stored.iter().position(|p| p == state) {
        MatchKind::Retrieval(k)
    } else if let Some(k) = stored.iter().position(reversed) {
        MatchKind::Reversed(k)
    } else {
        MatchKind::Spurious
    };
    Ok(MatchOutcome { kind, overlap })
}
