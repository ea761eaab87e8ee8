//! Full correction trials: noisy rounds of measurement and decoding on an
//! accumulated Pauli frame, a closing noiseless round, and a logical check.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{
    analytic_toric_single_shot, derive_single_shot_basis, CssCode, Family, Side, SingleShotBasis,
};
use crate::decode::{
    decode_repeated_rounds, decode_single_shot_round, mwpm_match, parity_repair, MatchingGraph,
    SpaceTimeGraph,
};
use crate::error::{check_len, Error, Result};
use crate::gf2::{mat_vec_mul, BitMatrix, BitVec, RowSpace};
use crate::noise::{
    bernoulli_bits, depolarize, sample_phenomenological_round, sample_zx_round, NoiseModel,
    PauliFrame, RoundSample, ZxSchedule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckScheme {
    /// Local checks measured `L` times, decoded once in space-time.
    LocalRepeated,
    /// Local checks decoded after every single round.
    Local,
    SingleShotAnalytic,
    SingleShotEliminated,
}

impl CheckScheme {
    pub const ALL: [CheckScheme; 4] = [
        CheckScheme::LocalRepeated,
        CheckScheme::Local,
        CheckScheme::SingleShotAnalytic,
        CheckScheme::SingleShotEliminated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckScheme::LocalRepeated => "local-repeated",
            CheckScheme::Local => "local",
            CheckScheme::SingleShotAnalytic => "single-shot-analytic",
            CheckScheme::SingleShotEliminated => "single-shot-eliminated",
        }
    }

    pub fn is_single_round(self) -> bool {
        self != CheckScheme::LocalRepeated
    }
}

impl std::fmt::Display for CheckScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CheckScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        CheckScheme::ALL
            .into_iter()
            .find(|c| c.name() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown check scheme {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sides {
    ZOnly,
    Both,
}

impl Sides {
    /// Phenomenological noise only produces bit flips, so only Z checks are
    /// measured; the gate model needs both.
    pub fn for_model(noise: &NoiseModel) -> Sides {
        match noise {
            NoiseModel::Phenomenological(_) => Sides::ZOnly,
            NoiseModel::Zx(_) => Sides::Both,
        }
    }

    pub fn list(self) -> &'static [Side] {
        match self {
            Sides::ZOnly => &[Side::Z],
            Sides::Both => &[Side::Z, Side::X],
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub code: CssCode,
    pub check_scheme: CheckScheme,
    pub noise: NoiseModel,
    /// Noisy rounds before the closing noiseless one.
    pub rounds: usize,
    pub seed: u64,
    pub sides: Sides,
    /// Also compute the reduced weight of the final residual.
    pub reduced_weight: bool,
}

impl TrialConfig {
    pub fn new(code: CssCode, check_scheme: CheckScheme, noise: NoiseModel, rounds: usize) -> Self {
        let sides = Sides::for_model(&noise);
        Self {
            code,
            check_scheme,
            noise,
            rounds,
            seed: 0,
            sides,
            reduced_weight: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if matches!(self.noise, NoiseModel::Phenomenological(_)) && self.sides != Sides::ZOnly {
            return Err(Error::InvalidParameter(
                "phenomenological noise is corrected on the Z side only".into(),
            ));
        }
        if self.check_scheme == CheckScheme::LocalRepeated && self.rounds != self.code.size {
            return Err(Error::InvalidParameter(format!(
                "repeated local checks use L = {} noisy rounds, got {}",
                self.code.size, self.rounds
            )));
        }
        if self.check_scheme == CheckScheme::SingleShotAnalytic && self.code.family != Family::Toric
        {
            return Err(Error::InvalidParameter(format!(
                "analytic single-shot checks exist for the toric code only, not {}",
                self.code.family
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalFailure {
    /// Residual X errors anticommute with a Z logical.
    pub x: bool,
    /// Residual Z errors anticommute with an X logical.
    pub z: bool,
}

impl LogicalFailure {
    pub fn any(self) -> bool {
        self.x || self.z
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReducedWeight {
    Exact(usize),
    /// From a matching correction; the true value is no larger.
    UpperBound(usize),
}

impl ReducedWeight {
    pub fn value(self) -> usize {
        match self {
            ReducedWeight::Exact(w) | ReducedWeight::UpperBound(w) => w,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub logical_failure: LogicalFailure,
    pub residual_weight: usize,
    pub residual_reduced_weight: Option<ReducedWeight>,
    /// Noisy rounds plus the closing perfect round.
    pub rounds_executed: usize,
}

/// Per-side data shared by all trials of one configuration.
#[derive(Clone, Debug)]
struct SideContext {
    side: Side,
    /// Checks actually measured each noisy round.
    measured: BitMatrix,
    basis: Option<SingleShotBasis>,
    graph: MatchingGraph,
}

/// Everything about a trial that does not depend on the error rate, the
/// number of rounds or the seed.
#[derive(Clone, Debug)]
pub struct TrialRunner {
    code: CssCode,
    scheme: CheckScheme,
    sides: Sides,
    contexts: Vec<SideContext>,
    /// Gate schedule of the measured checks.
    schedule: ZxSchedule,
}

fn local_graph(code: &CssCode, side: Side) -> Result<MatchingGraph> {
    let h = code.checks(side);
    if code.family == Family::Toric {
        MatchingGraph::torus(h, code.size)
    } else {
        crate::decode::build_matching_graph(h)
    }
}

impl TrialRunner {
    pub fn new(code: &CssCode, scheme: CheckScheme, sides: Sides) -> Result<Self> {
        let mut contexts = Vec::new();
        for &side in sides.list() {
            let basis = match scheme {
                CheckScheme::SingleShotAnalytic => {
                    if code.family != Family::Toric {
                        return Err(Error::InvalidParameter(format!(
                            "analytic single-shot checks exist for the toric code only, not {}",
                            code.family
                        )));
                    }
                    Some(analytic_toric_single_shot(code.size, side)?)
                }
                CheckScheme::SingleShotEliminated => Some(derive_single_shot_basis(code, side)),
                CheckScheme::Local | CheckScheme::LocalRepeated => None,
            };
            let measured = match &basis {
                Some(b) => b.checks.clone(),
                None => code.checks(side).clone(),
            };
            contexts.push(SideContext {
                side,
                measured,
                basis,
                graph: local_graph(code, side)?,
            });
        }
        let empty = BitMatrix::zeros(0, code.n);
        let z = contexts
            .iter()
            .find(|c| c.side == Side::Z)
            .map(|c| &c.measured);
        let x = contexts
            .iter()
            .find(|c| c.side == Side::X)
            .map(|c| &c.measured);
        let schedule = ZxSchedule::new(z.unwrap_or(&empty), x.unwrap_or(&empty))?;
        Ok(Self {
            code: code.clone(),
            scheme,
            sides,
            contexts,
            schedule,
        })
    }

    pub fn from_config(cfg: &TrialConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new(&cfg.code, cfg.check_scheme, cfg.sides)
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    pub fn scheme(&self) -> CheckScheme {
        self.scheme
    }

    pub fn sides(&self) -> Sides {
        self.sides
    }

    fn context(&self, side: Side) -> Result<&SideContext> {
        self.contexts
            .iter()
            .find(|c| c.side == side)
            .ok_or_else(|| Error::InvalidParameter(format!("side {side} is not decoded")))
    }

    /// Checks measured on `side` in every noisy round.
    pub fn measured_checks(&self, side: Side) -> Result<&BitMatrix> {
        Ok(&self.context(side)?.measured)
    }

    pub fn basis(&self, side: Side) -> Result<Option<&SingleShotBasis>> {
        Ok(self.context(side)?.basis.as_ref())
    }

    /// Errors seen by the checks of `side`: X errors for Z checks.
    fn seen(frame: &PauliFrame, side: Side) -> &BitVec {
        match side {
            Side::Z => &frame.x,
            Side::X => &frame.z,
        }
    }

    fn seen_mut(frame: &mut PauliFrame, side: Side) -> &mut BitVec {
        match side {
            Side::Z => &mut frame.x,
            Side::X => &mut frame.z,
        }
    }

    /// One single-round measurement and decode on `side`: the measured
    /// checks see `errors`, outcomes flip on `flips`, and the returned
    /// correction is to be XORed onto `errors`. A zero `flips` vector gives
    /// a noiseless round.
    pub fn correct_round<R: rand::Rng + ?Sized>(
        &self,
        side: Side,
        errors: &BitVec,
        flips: &BitVec,
        rng: &mut R,
    ) -> Result<BitVec> {
        let ctx = self.context(side)?;
        let mut observed = mat_vec_mul(&ctx.measured, errors)?;
        check_len(observed.len(), flips.len())?;
        observed.xor_assign(flips);
        let result = match &ctx.basis {
            Some(basis) => decode_single_shot_round(basis, &ctx.graph, &observed)?,
            None => {
                if ctx.graph.boundary().is_none() {
                    parity_repair(&mut observed, rng);
                }
                mwpm_match(&ctx.graph, &observed)?
            }
        };
        Ok(result.correction)
    }

    fn sample_round<R: rand::Rng + ?Sized>(&self, noise: &NoiseModel, rng: &mut R) -> RoundSample {
        match noise {
            NoiseModel::Phenomenological(params) => {
                let rows = self.contexts[0].measured.rows();
                sample_phenomenological_round(self.code.n, rows, *params, rng)
            }
            NoiseModel::Zx(params) => sample_zx_round(&self.schedule, *params, rng),
        }
    }

    fn flips(sample: &RoundSample, side: Side) -> &BitVec {
        match side {
            Side::Z => &sample.flips_z,
            Side::X => &sample.flips_x,
        }
    }

    /// Fresh data noise of the closing round.
    fn final_data_noise<R: rand::Rng + ?Sized>(
        &self,
        noise: &NoiseModel,
        rng: &mut R,
    ) -> PauliFrame {
        let n = self.code.n;
        match noise {
            NoiseModel::Phenomenological(params) => PauliFrame {
                x: bernoulli_bits(n, params.p, rng),
                z: BitVec::zeros(n),
            },
            NoiseModel::Zx(params) => depolarize(n, params.p_g, rng),
        }
    }

    /// Runs one trial with its own seeded generator.
    pub fn run(
        &self,
        noise: &NoiseModel,
        rounds: usize,
        seed: u64,
        with_reduced_weight: bool,
    ) -> Result<TrialOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut frame = match self.scheme {
            CheckScheme::LocalRepeated => self.repeated_frame(noise, rounds, &mut rng)?,
            _ => self.single_shot_frame(noise, rounds, &mut rng)?,
        };
        // Sides that are not decoded are not judged.
        if self.sides == Sides::ZOnly {
            frame.z = BitVec::zeros(self.code.n);
        }
        let logical_failure = logical_failure(&self.code, &frame)?;
        let residual_reduced_weight = if with_reduced_weight {
            Some(self.residual_reduced_weight(&frame)?)
        } else {
            None
        };
        Ok(TrialOutcome {
            logical_failure,
            residual_weight: frame.weight(),
            residual_reduced_weight,
            rounds_executed: rounds + 1,
        })
    }

    fn single_shot_frame(
        &self,
        noise: &NoiseModel,
        rounds: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<PauliFrame> {
        let mut frame = PauliFrame::new(self.code.n);
        for _ in 0..rounds {
            let sample = self.sample_round(noise, rng);
            frame.apply(&sample.data);
            for ctx in &self.contexts {
                let errors = Self::seen(&frame, ctx.side).clone();
                let c =
                    self.correct_round(ctx.side, &errors, Self::flips(&sample, ctx.side), rng)?;
                Self::seen_mut(&mut frame, ctx.side).xor_assign(&c);
            }
            frame.apply(&sample.gate_data);
        }
        frame.apply(&self.final_data_noise(noise, rng));
        for ctx in &self.contexts {
            let errors = Self::seen(&frame, ctx.side).clone();
            let quiet = BitVec::zeros(ctx.measured.rows());
            let c = self.correct_round(ctx.side, &errors, &quiet, rng)?;
            Self::seen_mut(&mut frame, ctx.side).xor_assign(&c);
        }
        Ok(frame)
    }

    fn repeated_frame(
        &self,
        noise: &NoiseModel,
        rounds: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<PauliFrame> {
        let mut frame = PauliFrame::new(self.code.n);
        let mut history: Vec<Vec<BitVec>> =
            vec![Vec::with_capacity(rounds + 1); self.contexts.len()];
        for _ in 0..rounds {
            let sample = self.sample_round(noise, rng);
            frame.apply(&sample.data);
            for (k, ctx) in self.contexts.iter().enumerate() {
                let mut s = mat_vec_mul(&ctx.measured, Self::seen(&frame, ctx.side))?;
                s.xor_assign(Self::flips(&sample, ctx.side));
                history[k].push(s);
            }
            frame.apply(&sample.gate_data);
        }
        frame.apply(&self.final_data_noise(noise, rng));
        for (k, ctx) in self.contexts.iter().enumerate() {
            history[k].push(mat_vec_mul(&ctx.measured, Self::seen(&frame, ctx.side))?);
            let st = SpaceTimeGraph::new(ctx.graph.clone(), rounds);
            let result = decode_repeated_rounds(&st, &history[k])?;
            Self::seen_mut(&mut frame, ctx.side).xor_assign(&result.correction);
        }
        Ok(frame)
    }

    fn residual_reduced_weight(&self, frame: &PauliFrame) -> Result<ReducedWeight> {
        let mut total = 0;
        let mut exact = true;
        for ctx in &self.contexts {
            let e = Self::seen(frame, ctx.side);
            match reduced_weight(&self.code, ctx.side, e) {
                Ok(w) => total += w,
                Err(Error::UnsupportedSize(_)) => {
                    exact = false;
                    total += matching_upper_bound(&self.code, ctx.side, &ctx.graph, e)?;
                }
                Err(other) => return Err(other),
            }
        }
        Ok(if exact {
            ReducedWeight::Exact(total)
        } else {
            ReducedWeight::UpperBound(total)
        })
    }
}

/// Runs `N` noisy single-round corrections and a closing noiseless round.
pub fn run_single_shot_trial(cfg: &TrialConfig) -> Result<TrialOutcome> {
    if !cfg.check_scheme.is_single_round() {
        return Err(Error::InvalidParameter(format!(
            "{} is not a single-round scheme",
            cfg.check_scheme
        )));
    }
    TrialRunner::from_config(cfg)?.run(&cfg.noise, cfg.rounds, cfg.seed, cfg.reduced_weight)
}

/// Runs `L` noisy rounds of local checks and one noiseless round, decoded
/// together in space-time.
pub fn run_repeated_trial(cfg: &TrialConfig) -> Result<TrialOutcome> {
    if cfg.check_scheme != CheckScheme::LocalRepeated {
        return Err(Error::InvalidParameter(format!(
            "{} is not the repeated local scheme",
            cfg.check_scheme
        )));
    }
    TrialRunner::from_config(cfg)?.run(&cfg.noise, cfg.rounds, cfg.seed, cfg.reduced_weight)
}

/// Which logical sectors a syndrome-free residual flips.
pub fn logical_failure(code: &CssCode, residual: &PauliFrame) -> Result<LogicalFailure> {
    check_len(code.n, residual.len())?;
    if !mat_vec_mul(&code.hz, &residual.x)?.is_zero()
        || !mat_vec_mul(&code.hx, &residual.z)?.is_zero()
    {
        return Err(Error::ContractViolation(
            "residual error has a nonzero syndrome".into(),
        ));
    }
    Ok(LogicalFailure {
        x: code.logical_z.iter().any(|l| l.dot(&residual.x)),
        z: code.logical_x.iter().any(|l| l.dot(&residual.z)),
    })
}

/// Number of weight-`w` patterns tried by the low-weight search before
/// falling back to coset enumeration.
const SEARCH_BUDGET: u64 = 1 << 22;
/// Largest stabilizer rank for which the whole coset is enumerated.
pub const MAX_ENUMERATED_RANK: usize = 26;

fn binomial(n: usize, k: usize) -> u64 {
    let mut acc = 1u64;
    for i in 0..k as u64 {
        acc = acc.saturating_mul(n as u64 - i) / (i + 1);
    }
    acc
}

/// Minimum weight of `e` times any stabilizer that acts like it. Errors seen
/// by `detected_by` checks (X errors for Z checks) are reduced by the
/// stabilizers of the other type.
pub fn reduced_weight(code: &CssCode, detected_by: Side, e: &BitVec) -> Result<usize> {
    check_len(code.n, e.len())?;
    let stabilizers = code.checks(detected_by.dual());
    let space = RowSpace::new(stabilizers);
    let r = space.dim();
    let n = code.n;

    // Smallest w with some weight-w f such that e ⊕ f is a stabilizer,
    // i.e. f reduces to the same residue as e. Reduction is linear, so
    // residues of f are sums of residues of unit vectors.
    let target = space.reduce(e);
    if target.is_zero() {
        return Ok(0);
    }
    let units: Vec<BitVec> = (0..n).map(|q| space.reduce(&BitVec::unit(n, q))).collect();
    let mut spent = 0u64;
    let mut exhausted = true;
    for w in 1..e.weight() {
        spent = spent.saturating_add(binomial(n, w));
        if spent > SEARCH_BUDGET {
            exhausted = false;
            break;
        }
        if has_combination(&units, w, &target) {
            return Ok(w);
        }
    }
    if exhausted {
        return Ok(e.weight());
    }
    if r > MAX_ENUMERATED_RANK {
        return Err(Error::UnsupportedSize(format!(
            "stabilizer rank {r} is above {MAX_ENUMERATED_RANK}; exact reduced weight is out of reach"
        )));
    }
    // Gray-code walk over the whole coset.
    let basis = space.basis();
    let mut current = e.clone();
    let mut best = current.weight();
    for step in 1u64..(1u64 << r) {
        current.xor_assign(&basis[step.trailing_zeros() as usize]);
        best = best.min(current.weight());
    }
    Ok(best)
}

/// Whether some `w` distinct vectors of `units` sum to `target`.
fn has_combination(units: &[BitVec], w: usize, target: &BitVec) -> bool {
    fn rec(units: &[BitVec], start: usize, left: usize, acc: &mut BitVec, target: &BitVec) -> bool {
        if left == 0 {
            return acc == target;
        }
        for i in start..=units.len() - left {
            acc.xor_assign(&units[i]);
            let found = rec(units, i + 1, left - 1, acc, target);
            acc.xor_assign(&units[i]);
            if found {
                return true;
            }
        }
        false
    }
    let mut acc = BitVec::zeros(target.len());
    w <= units.len() && rec(units, 0, w, &mut acc, target)
}

/// Upper bound on the reduced weight from matching the syndrome of `e`: the
/// matching correction is in the same coset whenever `e` times it is a
/// stabilizer.
pub fn matching_upper_bound(
    code: &CssCode,
    side: Side,
    graph: &MatchingGraph,
    e: &BitVec,
) -> Result<usize> {
    let s = mat_vec_mul(code.checks(side), e)?;
    let c = mwpm_match(graph, &s)?.correction;
    let space = RowSpace::new(code.checks(side.dual()));
    let mut bound = e.weight();
    if space.contains(&c.xor(e)) {
        bound = bound.min(c.weight());
    }
    Ok(bound)
}

/// Per-round logical error rate equivalent to a cumulative rate after `n`
/// rounds.
pub fn per_round_rate(p_l: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_l) || p_l.is_nan() {
        return Err(Error::ContractViolation(format!(
            "cumulative logical error rate {p_l} is not a probability"
        )));
    }
    if n == 0 {
        return Err(Error::ContractViolation(
            "round count must be positive".into(),
        ));
    }
    Ok(1.0 - (1.0 - p_l).powf(1.0 / n as f64))
}
