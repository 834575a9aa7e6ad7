//! A parameterized correlated qubit source.
//!
//! Emissions are single-qubit states: the base state for the current
//! setting, rotated about the Y axis by an angle that accumulates one
//! kernel term per history entry, `g(setting) * delta_l` at separation
//! `l`. With real base states this construction *saturates* the
//! correlation definition: altering the setting at separation `l` moves
//! the state by exactly `sin^2(delta_l * max|g(a) - g(b)| / 2)`, so a
//! kernel with `delta_l = 2 asin(sqrt(epsilon_l))` reproduces a target
//! profile exactly. A saturating family is what makes the bound checks
//! meaningful; a slack one would pass vacuously.
//!
//! An optional phase kick multiplies each emission by a history-dependent
//! global phase. It leaves every overlap magnitude (and hence every
//! epsilon_l) unchanged but forces the phase prescription in the global
//! state construction to do real work.

use corrbudget_core::CorrelationModel;

use super::{C64, VerifierError};

/// Reference setting substituted for history entries beyond the
/// truncation point. Its weight is pinned to 0 so the reference history
/// is a rotation fixed point.
pub(crate) const REFERENCE_SETTING: usize = 0;

#[derive(Debug, Clone)]
pub struct SourceSpec {
    probs: Vec<f64>,
    base_states: Vec<[C64; 2]>,
    kernel: Vec<f64>,
    weights: Vec<f64>,
    phase_kick: f64,
}

impl SourceSpec {
    pub fn new(
        probs: Vec<f64>,
        base_states: Vec<[C64; 2]>,
        kernel: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self, VerifierError> {
        let j = probs.len();
        assert!(j >= 1, "alphabet must be non-empty");
        assert_eq!(base_states.len(), j, "one base state per setting");
        assert_eq!(weights.len(), j, "one weight per setting");
        let psum: f64 = probs.iter().sum();
        if (psum - 1.0).abs() > 1e-12 {
            return Err(VerifierError::InvalidProbabilities(psum));
        }
        for (index, s) in base_states.iter().enumerate() {
            let norm = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(VerifierError::InvalidBaseState { index, norm });
            }
        }
        for (i, &delta) in kernel.iter().enumerate() {
            if !(0.0..=std::f64::consts::PI).contains(&delta) {
                return Err(VerifierError::InvalidKernelAngle {
                    l: (i + 1) as u64,
                    value: delta,
                });
            }
        }
        Ok(Self {
            probs,
            base_states,
            kernel,
            weights,
            phase_kick: 0.0,
        })
    }

    /// Source whose kernel realizes `model`'s correlation strengths
    /// exactly, with uniform setting probabilities and the default
    /// weights `g(j) = j / (J - 1)`.
    pub fn from_model(
        model: &CorrelationModel,
        alphabet: usize,
        kernel_len: u64,
    ) -> Result<Self, VerifierError> {
        let probs = vec![1.0 / alphabet as f64; alphabet];
        let spread = (alphabet - 1).max(1) as f64;
        let weights: Vec<f64> = (0..alphabet).map(|j| j as f64 / spread).collect();
        // Distinct real base states, spread over a quarter turn.
        let base_states: Vec<[C64; 2]> = (0..alphabet)
            .map(|j| {
                let half = j as f64 * std::f64::consts::FRAC_PI_2 / spread / 2.0;
                [C64::new(half.cos(), 0.0), C64::new(half.sin(), 0.0)]
            })
            .collect();
        let mut kernel = Vec::with_capacity(kernel_len as usize);
        for l in 1..=kernel_len {
            let eps = model.epsilon_at(l)?;
            kernel.push(2.0 * eps.sqrt().asin());
        }
        Self::new(probs, base_states, kernel, weights)
    }

    /// Same source, but each emission picks up a history-dependent global
    /// phase scaled by `kick`.
    pub fn with_phase_kick(mut self, kick: f64) -> Self {
        self.phase_kick = kick;
        self
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn kernel_len(&self) -> u64 {
        self.kernel.len() as u64
    }

    fn weight_spread(&self) -> f64 {
        let max = self.weights.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.weights.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }

    /// The correlation strength this kernel realizes at separation `l`:
    /// `sin^2(delta_l * max|g(a) - g(b)| / 2)`, zero beyond the kernel.
    pub fn realized_epsilon(&self, l: u64) -> f64 {
        match self.kernel.get((l - 1) as usize) {
            Some(&delta) => {
                let s = (delta * self.weight_spread() / 2.0).sin();
                s * s
            }
            None => 0.0,
        }
    }

    /// Tail aggregate `sqrt(delta_le)` of the realized profile over
    /// separations `l_e+1..=n`.
    pub fn realized_sqrt_delta(&self, l_e: u64, n: u64) -> f64 {
        (l_e + 1..=n).map(|l| self.realized_epsilon(l).sqrt()).sum()
    }

    /// The state emitted for setting `j_current` after `history` (most
    /// recent setting first: `history[0]` is the previous round). With
    /// `truncate_at = Some(l_e)`, history entries at separations beyond
    /// `l_e` are first replaced by the reference setting.
    pub fn emitted_state(
        &self,
        j_current: usize,
        history: &[usize],
        truncate_at: Option<u64>,
    ) -> Result<[C64; 2], VerifierError> {
        let alphabet = self.alphabet_size();
        if j_current >= alphabet {
            return Err(VerifierError::SettingOutOfAlphabet {
                setting: j_current,
                alphabet,
            });
        }
        let mut angle = 0.0;
        let mut phase = 0.0;
        for (i, &s) in history.iter().enumerate() {
            if s >= alphabet {
                return Err(VerifierError::SettingOutOfAlphabet {
                    setting: s,
                    alphabet,
                });
            }
            let l = i + 1;
            let s_eff = match truncate_at {
                Some(l_e) if l as u64 > l_e => REFERENCE_SETTING,
                _ => s,
            };
            let delta = self.kernel.get(l - 1).copied().unwrap_or(0.0);
            let g = self.weights[s_eff];
            angle += g * delta;
            phase += self.phase_kick * g * delta * l as f64;
        }
        let base = self.base_states[j_current];
        let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
        let rotated = [c * base[0] - s * base[1], s * base[0] + c * base[1]];
        let kick = C64::from_polar(1.0, phase);
        Ok([kick * rotated[0], kick * rotated[1]])
    }

    /// Brute-force evaluation of the correlation strength at separation
    /// `l`: maximize `1 - |<psi_a|psi_b>|^2` over all length-`n_probe - 1`
    /// histories and all setting pairs substituted at separation `l`.
    pub fn measure_correlation_strength(
        &self,
        l: u64,
        n_probe: u64,
    ) -> Result<f64, VerifierError> {
        assert!(l >= 1 && l < n_probe, "need 1 <= l < N_probe");
        let j = self.alphabet_size();
        let hist_len = (n_probe - 1) as usize;
        let combos = (j as u128).pow(hist_len as u32) * (j * j * j) as u128;
        if combos > 20_000_000 {
            return Err(VerifierError::ResourceLimit {
                dim: combos,
                cap: 20_000_000,
            });
        }
        let mut max_var: f64 = 0.0;
        let mut history = vec![0usize; hist_len];
        loop {
            for j_current in 0..j {
                for a in 0..j {
                    for b in (a + 1)..j {
                        let mut h_a = history.clone();
                        let mut h_b = history.clone();
                        h_a[(l - 1) as usize] = a;
                        h_b[(l - 1) as usize] = b;
                        let sa = self.emitted_state(j_current, &h_a, None)?;
                        let sb = self.emitted_state(j_current, &h_b, None)?;
                        let ov = (sa[0].conj() * sb[0] + sa[1].conj() * sb[1]).norm_sqr();
                        max_var = max_var.max(1.0 - ov);
                    }
                }
            }
            // odometer over histories
            let mut pos = 0;
            loop {
                if pos == hist_len {
                    return Ok(max_var);
                }
                history[pos] += 1;
                if history[pos] < j {
                    break;
                }
                history[pos] = 0;
                pos += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use corrbudget_core::TabulatedModel;

    fn two_setting_spec(kernel: Vec<f64>) -> SourceSpec {
        SourceSpec::new(
            vec![0.5, 0.5],
            vec![
                [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            ],
            kernel,
            vec![0.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn empty_history_returns_base_state() {
        let spec = two_setting_spec(vec![0.3]);
        let s = spec.emitted_state(1, &[], None).unwrap();
        assert_eq!(s[0], C64::new(0.0, 0.0));
        assert_eq!(s[1], C64::new(1.0, 0.0));
    }

    #[test]
    fn reference_history_is_fixed_point() {
        let spec = two_setting_spec(vec![0.3, 0.2, 0.1]);
        let s = spec.emitted_state(0, &[0, 0, 0], None).unwrap();
        assert!((s[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(s[1].norm() < 1e-15);
    }

    #[test]
    fn half_turn_gives_orthogonal_state() {
        let spec = two_setting_spec(vec![std::f64::consts::PI]);
        let s = spec.emitted_state(0, &[1], None).unwrap();
        // |0> rotated by pi about Y lands on |1>.
        assert!(s[0].norm() < 1e-15);
        assert!((s[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn setting_out_of_alphabet_rejected() {
        let spec = two_setting_spec(vec![0.3]);
        assert!(spec.emitted_state(2, &[], None).is_err());
        assert!(spec.emitted_state(0, &[5], None).is_err());
    }

    #[test]
    fn zero_kernel_measures_zero() {
        let spec = two_setting_spec(vec![0.0, 0.0]);
        assert_eq!(spec.measure_correlation_strength(1, 3).unwrap(), 0.0);
        assert_eq!(spec.measure_correlation_strength(2, 3).unwrap(), 0.0);
    }

    #[test]
    fn kernel_from_model_reproduces_epsilon() {
        let eps = 1e-3;
        let model = CorrelationModel::from(TabulatedModel::new(vec![eps]).unwrap());
        let spec = SourceSpec::from_model(&model, 2, 1).unwrap();
        let measured = spec.measure_correlation_strength(1, 3).unwrap();
        assert!((measured - eps).abs() < 1e-12, "measured {measured}");
        assert!((spec.realized_epsilon(1) - eps).abs() < 1e-12);
    }

    #[test]
    fn pi_kernel_measures_one() {
        let spec = two_setting_spec(vec![std::f64::consts::PI]);
        let measured = spec.measure_correlation_strength(1, 2).unwrap();
        assert!((measured - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_kick_preserves_correlation_strength() {
        let model = CorrelationModel::from(TabulatedModel::new(vec![0.01, 0.005]).unwrap());
        let plain = SourceSpec::from_model(&model, 2, 2).unwrap();
        let kicked = SourceSpec::from_model(&model, 2, 2)
            .unwrap()
            .with_phase_kick(0.7);
        for l in 1..=2 {
            let a = plain.measure_correlation_strength(l, 4).unwrap();
            let b = kicked.measure_correlation_strength(l, 4).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}
