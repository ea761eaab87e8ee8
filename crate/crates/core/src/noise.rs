//! Noise sampling for the phenomenological and ZX gate models.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhenomenologicalParams {
    /// Data bit-flip probability.
    pub p: f64,
    /// Syndrome bit-flip probability.
    pub q: f64,
}

impl PhenomenologicalParams {
    /// Measurement errors at the same rate as data errors.
    pub fn coupled(p: f64) -> Self {
        Self { p, q: p }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("p", self.p)?;
        check_probability("q", self.q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZxParams {
    pub p_g: f64,
    /// Treat the pre-round depolarizing of each ancilla as an extra
    /// outcome flip with probability `2 p_g / 3`.
    pub ancilla_depolarizing_as_flip: bool,
}

impl ZxParams {
    pub fn new(p_g: f64) -> Self {
        Self {
            p_g,
            ancilla_depolarizing_as_flip: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("p_g", self.p_g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum NoiseModel {
    Phenomenological(PhenomenologicalParams),
    Zx(ZxParams),
}

impl NoiseModel {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::Phenomenological(_) => "phenomenological",
            NoiseModel::Zx(_) => "zx",
        }
    }

    /// The swept physical rate: `p` or `p_g`.
    pub fn rate(&self) -> f64 {
        match self {
            NoiseModel::Phenomenological(p) => p.p,
            NoiseModel::Zx(z) => z.p_g,
        }
    }

    pub fn with_rate(&self, rate: f64) -> NoiseModel {
        match *self {
            NoiseModel::Phenomenological(_) => {
                NoiseModel::Phenomenological(PhenomenologicalParams::coupled(rate))
            }
            NoiseModel::Zx(z) => NoiseModel::Zx(ZxParams { p_g: rate, ..z }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::Phenomenological(p) => p.validate(),
            NoiseModel::Zx(z) => z.validate(),
        }
    }
}

fn check_probability(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} = {value} is not a probability"
        )))
    }
}

/// Accumulated Pauli error; a Y sets both bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliFrame {
    pub x: BitVec,
    pub z: BitVec,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        Self {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn apply(&mut self, other: &PauliFrame) {
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Number of qubits with a non-identity Pauli.
    pub fn weight(&self) -> usize {
        self.x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }
}

/// Noise for one round of syndrome extraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundSample {
    /// Data errors present before the checks are measured.
    pub data: PauliFrame,
    /// Data errors left by faulty CNOTs; they land after this round's
    /// outcomes are recorded and are first seen next round.
    pub gate_data: PauliFrame,
    /// Outcome flips of the Z checks.
    pub flips_z: BitVec,
    /// Outcome flips of the X checks; empty when X checks are not measured.
    pub flips_x: BitVec,
}

impl RoundSample {
    pub fn quiet(n_qubits: usize, n_z: usize, n_x: usize) -> Self {
        Self {
            data: PauliFrame::new(n_qubits),
            gate_data: PauliFrame::new(n_qubits),
            flips_z: BitVec::zeros(n_z),
            flips_x: BitVec::zeros(n_x),
        }
    }
}

/// Independent Bernoulli(p) bits.
pub fn bernoulli_bits<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> BitVec {
    let mut v = BitVec::zeros(len);
    if p <= 0.0 || len == 0 {
        return v;
    }
    if p >= 1.0 {
        return BitVec::from_indices(len, 0..len);
    }
    if p < 0.2 {
        // Geometric gaps between successes.
        let log_q = (1.0 - p).ln();
        let mut pos = 0usize;
        loop {
            let u: f64 = 1.0 - rng.random::<f64>();
            let gap = (u.ln() / log_q).floor();
            if gap >= (len - pos) as f64 {
                break;
            }
            pos += gap as usize;
            v.flip(pos);
            pos += 1;
            if pos >= len {
                break;
            }
        }
    } else {
        for i in 0..len {
            if rng.random::<f64>() < p {
                v.flip(i);
            }
        }
    }
    v
}

/// Independent X flips with probability `p` on the data and outcome flips
/// with probability `q` on `n_checks` Z checks.
pub fn sample_phenomenological_round<R: Rng + ?Sized>(
    n_qubits: usize,
    n_checks: usize,
    params: PhenomenologicalParams,
    rng: &mut R,
) -> RoundSample {
    let x = bernoulli_bits(n_qubits, params.p, rng);
    let flips_z = bernoulli_bits(n_checks, params.q, rng);
    RoundSample {
        data: PauliFrame {
            x,
            z: BitVec::zeros(n_qubits),
        },
        gate_data: PauliFrame::new(n_qubits),
        flips_z,
        flips_x: BitVec::zeros(0),
    }
}

/// CNOT layout of one round: which data qubits each measured check touches.
#[derive(Clone, Debug)]
pub struct ZxSchedule {
    n_qubits: usize,
    z_supports: Vec<Vec<usize>>,
    x_supports: Vec<Vec<usize>>,
}

impl ZxSchedule {
    pub fn new(z_checks: &BitMatrix, x_checks: &BitMatrix) -> Result<Self> {
        crate::error::check_len(z_checks.cols(), x_checks.cols())?;
        let supports = |m: &BitMatrix| (0..m.rows()).map(|r| m.row_support(r)).collect();
        Ok(Self {
            n_qubits: z_checks.cols(),
            z_supports: supports(z_checks),
            x_supports: supports(x_checks),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
}

/// Each qubit suffers X, Y or Z with probability `p / 3` each.
pub fn depolarize<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> PauliFrame {
    let mut frame = PauliFrame::new(n);
    for q in bernoulli_bits(n, p, rng).ones() {
        match rng.random_range(0..3u8) {
            0 => frame.x.flip(q),
            1 => {
                frame.x.flip(q);
                frame.z.flip(q);
            }
            _ => frame.z.flip(q),
        }
    }
    frame
}

/// One round of the ZX gate model.
///
/// Data qubits are depolarized with total probability `p_g` before the
/// round. Each CNOT then fails with probability `p_g`, leaving an error on
/// its data qubit that the measured check cannot see (Z for Z checks, X for
/// X checks) and flipping the check outcome. Every outcome finally flips
/// with probability `2 p_g / 3`, plus the same again for the ancilla's own
/// depolarizing when that option is on. Z checks use the data qubit as CNOT
/// control and X checks use it as target, so no fault spreads between data
/// qubits.
pub fn sample_zx_round<R: Rng + ?Sized>(
    schedule: &ZxSchedule,
    params: ZxParams,
    rng: &mut R,
) -> RoundSample {
    let n = schedule.n_qubits;
    let p = params.p_g;
    let mut sample = RoundSample::quiet(n, schedule.z_supports.len(), schedule.x_supports.len());
    if p <= 0.0 {
        return sample;
    }

    sample.data = depolarize(n, p, rng);

    let readout = 2.0 * p / 3.0;
    for (supports, flips, frame) in [
        (
            &schedule.z_supports,
            &mut sample.flips_z,
            &mut sample.gate_data.z,
        ),
        (
            &schedule.x_supports,
            &mut sample.flips_x,
            &mut sample.gate_data.x,
        ),
    ] {
        for (check, support) in supports.iter().enumerate() {
            for &q in support {
                if rng.random::<f64>() < p {
                    frame.flip(q);
                    flips.flip(check);
                }
            }
            if params.ancilla_depolarizing_as_flip && rng.random::<f64>() < readout {
                flips.flip(check);
            }
            if rng.random::<f64>() < readout {
                flips.flip(check);
            }
        }
    }
    sample
}

/// Probability that two independent flips with the given rates leave the
/// bit changed.
pub fn compose_flips(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Closed-form outcome-flip probability of a weight-`w` check in the ZX
/// model.
pub fn zx_measurement_flip_prob(w: usize, params: ZxParams) -> Result<f64> {
    if w == 0 {
        return Err(Error::InvalidParameter(
            "check weight must be positive".into(),
        ));
    }
    params.validate()?;
    let p = params.p_g;
    let cnot = (1.0 - (1.0 - 2.0 * p).powi(w as i32)) / 2.0;
    let readout = 2.0 * p / 3.0;
    let mut total = compose_flips(cnot, readout);
    if params.ancilla_depolarizing_as_flip {
        total = compose_flips(total, readout);
    }
    Ok(total)
}
