//! Second-order rotating-wave averaging of multi-tone Hamiltonians.
//!
//! A term set describes `H(t) = H_c + sum_k g_k e^{i w_k t} A_k`. The engine
//! returns the static effective Hamiltonian
//!
//! ```text
//! H_eff = avg(H) + sum_{w > 0} (1/w) [B_w, B_{-w}],   B_w = sum_{w_k = w} g_k A_k
//! ```
//!
//! Amplitudes and frequencies may be in any units as long as they agree
//! (the device builders use MHz, i.e. values over 2 pi). Frequencies are
//! matched on an integer grid of `resolution` (1 Hz for MHz inputs); two
//! tones that land on the same grid point must agree to 1e-12 relative or
//! the set is rejected. Corrections beyond second order are not computed;
//! the device model absorbs them in the empirical common pump shift.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hilbert::{c, commutator, ModeSpace, QOperator, C64};

/// Default grid: 1 Hz expressed in MHz.
pub const DEFAULT_RESOLUTION: f64 = 1e-6;

/// Above this `|g/w|^2` a term is flagged as outside the RWA comfort zone.
pub const LEAKAGE_WARN_THRESHOLD: f64 = 0.05;

const MERGE_REL_TOL: f64 = 1e-12;
const HERMITIAN_REL_TOL: f64 = 1e-12;

/// One harmonic term `amplitude * e^{i frequency t} * operator`.
#[derive(Clone, Debug)]
pub struct Tone {
    pub amplitude: C64,
    pub frequency: f64,
    pub operator: QOperator,
}

impl Tone {
    pub fn new(amplitude: C64, frequency: f64, operator: QOperator) -> Self {
        Self {
            amplitude,
            frequency,
            operator,
        }
    }

    fn conjugate(&self) -> Self {
        Self {
            amplitude: self.amplitude.conj(),
            frequency: -self.frequency,
            operator: self.operator.dagger(),
        }
    }

    fn weighted(&self) -> QOperator {
        self.operator.scale(self.amplitude)
    }
}

#[derive(Clone, Debug)]
pub struct RwaTermSet {
    static_part: QOperator,
    terms: Vec<Tone>,
    resolution: f64,
    num_listed: usize,
}

impl RwaTermSet {
    /// Builds a term set, appending the Hermitian partner `(g^*, -w, A^dag)`
    /// of every term whose partner is not already listed.
    pub fn new(static_part: QOperator, terms: Vec<Tone>) -> Result<Self> {
        Self::with_resolution(static_part, terms, DEFAULT_RESOLUTION)
    }

    pub fn with_resolution(
        static_part: QOperator,
        terms: Vec<Tone>,
        resolution: f64,
    ) -> Result<Self> {
        if !(resolution > 0.0) {
            return Err(Error::param("resolution", "must be positive"));
        }
        for t in &terms {
            if t.operator.space() != static_part.space() {
                return Err(Error::SpaceMismatch);
            }
            if !t.frequency.is_finite() {
                return Err(Error::param("frequency", "must be finite"));
            }
        }
        let num_listed = terms.len();
        let mut all = terms;
        let mut partners = Vec::new();
        for (i, t) in all.iter().enumerate() {
            let key = snap(t.frequency, resolution);
            let target = t.weighted().dagger();
            let scale = target.max_abs().max(f64::MIN_POSITIVE);
            let listed = all.iter().enumerate().any(|(j, u)| {
                (j != i || key == 0)
                    && snap(u.frequency, resolution) == -key
                    && u.weighted().max_abs_diff(&target) <= HERMITIAN_REL_TOL * scale
            });
            if !listed {
                partners.push(t.conjugate());
            }
        }
        all.extend(partners);
        let set = Self {
            static_part,
            terms: all,
            resolution,
            num_listed,
        };
        set.check_hermitian()?;
        Ok(set)
    }

    pub fn static_part(&self) -> &QOperator {
        &self.static_part
    }

    pub fn terms(&self) -> &[Tone] {
        &self.terms
    }

    pub fn space(&self) -> &ModeSpace {
        self.static_part.space()
    }

    /// Number of terms the caller supplied (the rest are auto-conjugates).
    pub fn num_listed(&self) -> usize {
        self.num_listed
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// `H(t)` as a dense operator.
    pub fn at(&self, t: f64) -> QOperator {
        let mut m = self.static_part.matrix().clone();
        for term in &self.terms {
            let ph = C64::from_polar(1.0, term.frequency * t);
            m += term.operator.matrix() * (term.amplitude * ph);
        }
        QOperator::new(self.space().clone(), m).expect("same space")
    }

    /// Groups terms by snapped frequency: key -> (representative frequency,
    /// member indices).
    fn groups(&self) -> Result<BTreeMap<i64, (f64, Vec<usize>)>> {
        let mut groups: BTreeMap<i64, (f64, Vec<usize>)> = BTreeMap::new();
        for (i, t) in self.terms.iter().enumerate() {
            let key = snap(t.frequency, self.resolution);
            let entry = groups.entry(key).or_insert((t.frequency, Vec::new()));
            let rep = entry.0;
            if (t.frequency - rep).abs() > MERGE_REL_TOL * rep.abs().max(t.frequency.abs()) {
                return Err(Error::FrequencyNearMiss {
                    a: rep,
                    b: t.frequency,
                });
            }
            entry.1.push(i);
        }
        Ok(groups)
    }

    fn group_operator(&self, members: &[usize]) -> QOperator {
        let mut op = QOperator::zeros(self.space());
        for &i in members {
            op = &op + &self.terms[i].weighted();
        }
        op
    }

    fn check_hermitian(&self) -> Result<()> {
        if !self
            .static_part
            .is_hermitian(HERMITIAN_REL_TOL * self.static_part.max_abs().max(1.0))
        {
            return Err(Error::NonHermitian("static part".into()));
        }
        let groups = self.groups()?;
        for (&key, (freq, members)) in &groups {
            if key < 0 {
                continue;
            }
            let b_pos = self.group_operator(members);
            let b_neg = groups
                .get(&-key)
                .map(|(_, m)| self.group_operator(m))
                .unwrap_or_else(|| QOperator::zeros(self.space()));
            let scale = b_pos.max_abs().max(b_neg.max_abs()).max(f64::MIN_POSITIVE);
            if b_neg.max_abs_diff(&b_pos.dagger()) > HERMITIAN_REL_TOL * scale.max(1.0) {
                return Err(Error::NonHermitian(format!(
                    "tones at +/-{freq} are not conjugate partners"
                )));
            }
        }
        Ok(())
    }
}

fn snap(freq: f64, resolution: f64) -> i64 {
    (freq / resolution).round() as i64
}

/// First-order (time-averaged) Hamiltonian: the static part plus any
/// zero-frequency terms.
pub fn time_average(set: &RwaTermSet) -> QOperator {
    let mut avg = set.static_part.clone();
    for t in &set.terms {
        if snap(t.frequency, set.resolution) == 0 {
            avg = &avg + &t.weighted();
        }
    }
    avg
}

/// Pairs of terms `(i at +w, j at -w)` whose products survive averaging.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonantPair {
    pub frequency: f64,
    pub positive: usize,
    pub negative: usize,
}

/// `sum_{w>0} (1/w) [B_w, B_{-w}]`.
pub fn second_order_static(set: &RwaTermSet) -> Result<QOperator> {
    Ok(second_order_with_pairs(set)?.0)
}

fn second_order_with_pairs(set: &RwaTermSet) -> Result<(QOperator, Vec<ResonantPair>)> {
    if let Some(index) = set
        .terms
        .iter()
        .position(|t| snap(t.frequency, set.resolution) == 0)
    {
        return Err(Error::ZeroFrequencyTerm { index });
    }
    let groups = set.groups()?;
    let mut out = QOperator::zeros(set.space());
    let mut pairs = Vec::new();
    for (&key, (freq, members)) in &groups {
        if key <= 0 {
            continue;
        }
        let Some((_, neg_members)) = groups.get(&-key) else {
            continue;
        };
        let b_pos = set.group_operator(members);
        let b_neg = set.group_operator(neg_members);
        let comm = commutator(&b_pos, &b_neg)?;
        out = &out + &comm.scale(c(1.0 / freq));
        for &i in members {
            for &j in neg_members {
                pairs.push(ResonantPair {
                    frequency: *freq,
                    positive: i,
                    negative: j,
                });
            }
        }
    }
    // The commutator of conjugate partners is anti-Hermitian times i; clean
    // the rounding so the result is Hermitian to machine precision.
    let herm = (&out + &out.dagger()).scale(c(0.5));
    Ok((herm, pairs))
}

#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pub matrix: QOperator,
    pub order1: QOperator,
    pub order2: QOperator,
    pub resonant_pairs: Vec<ResonantPair>,
}

/// Full effective Hamiltonian. `order1` holds the averaged terms beyond the
/// static part (zero-frequency tones), so that
/// `matrix = static_part + order1 + order2`.
pub fn effective_hamiltonian(set: &RwaTermSet) -> Result<EffectiveHamiltonian> {
    let avg = time_average(set);
    let order1 = &avg - &set.static_part;
    let oscillating: Vec<Tone> = set
        .terms
        .iter()
        .filter(|t| snap(t.frequency, set.resolution) != 0)
        .cloned()
        .collect();
    let osc_set = RwaTermSet {
        static_part: QOperator::zeros(set.space()),
        terms: oscillating,
        resolution: set.resolution,
        num_listed: 0,
    };
    let (order2, resonant_pairs) = second_order_with_pairs(&osc_set)?;
    let matrix = &avg + &order2;
    Ok(EffectiveHamiltonian {
        matrix,
        order1,
        order2,
        resonant_pairs,
    })
}

/// `|g_k / w_k|^2` for every term (listed and auto-completed).
pub fn leakage_ratios(set: &RwaTermSet) -> Vec<f64> {
    set.terms
        .iter()
        .map(|t| {
            if t.amplitude.norm() == 0.0 {
                0.0
            } else {
                (t.amplitude.norm() / t.frequency.abs()).powi(2)
            }
        })
        .collect()
}

/// Indices and ratios of terms above [`LEAKAGE_WARN_THRESHOLD`].
pub fn rwa_warnings(set: &RwaTermSet) -> Vec<(usize, f64)> {
    leakage_ratios(set)
        .into_iter()
        .enumerate()
        .filter(|(_, r)| *r > LEAKAGE_WARN_THRESHOLD)
        .collect()
}
