//! Counter-based random draws.
//!
//! Every draw is a pure function of an [`RngKey`]: the run seed, the step
//! index, the phase that consumes the draw, the entity it belongs to (agent id
//! or linear cell index) and an ordinal. No generator state is carried between
//! draws, so the order in which workers evaluate agents or cells cannot change
//! the outcome of a run.
//!
//! The key is absorbed word by word through the SplitMix64 finalizer. Normal
//! variates use Acklam's rational approximation of the inverse normal CDF
//! (relative error below 1.15e-9), applied to a single open-interval uniform.

/// Which part of a step consumes a draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Phase {
    Placement = 0,
    LemSelect = 1,
    AcoSelect = 2,
    Resolve = 3,
    TieBreak = 4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngKey {
    pub seed: u64,
    pub step: u64,
    pub phase: Phase,
    pub entity: u64,
    pub counter: u64,
}

impl RngKey {
    pub fn new(seed: u64, step: u64, phase: Phase, entity: u64) -> Self {
        RngKey {
            seed,
            step,
            phase,
            entity,
            counter: 0,
        }
    }

    pub fn with_counter(self, counter: u64) -> Self {
        RngKey { counter, ..self }
    }

    /// 64 pseudo-random bits for this key.
    pub fn bits(&self) -> u64 {
        const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
        let mut h = mix(self.seed.wrapping_add(GOLDEN));
        for word in [self.step, self.phase as u64, self.entity, self.counter] {
            h = mix(h ^ word).wrapping_add(GOLDEN);
        }
        mix(h)
    }
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Uniform variate in `[0, 1)`.
#[inline]
pub fn uniform(key: RngKey) -> f64 {
    (key.bits() >> 11) as f64 * INV_2_53
}

/// Uniform variate in the open interval `(0, 1)`.
#[inline]
fn open_uniform(key: RngKey) -> f64 {
    ((key.bits() >> 11) as f64 + 0.5) * INV_2_53
}

/// Normal variate with mean `mu` and standard deviation `sigma`.
pub fn normal(key: RngKey, mu: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return mu;
    }
    mu + sigma * inverse_normal_cdf(open_uniform(key))
}

/// Acklam's approximation of the standard normal quantile for `p` in `(0, 1)`.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}
