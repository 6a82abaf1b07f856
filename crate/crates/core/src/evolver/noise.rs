use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{build_mode_operators, embed, CMatrix, Level, ModeLayout, OperatorMatrix, C64};
use crate::units::tphi_from_t2r;

/// Device coherence parameters in µs. `None` disables a channel.
///
/// For a three-level ancilla `t1_fe` and `tphi_gf` fall back to `t1_ge/2` and
/// `tphi_ge/4` when unset. In files, an omitted channel is off.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default = "NoiseParams::none", deny_unknown_fields)]
pub struct NoiseParams {
    pub t1_a: Option<f64>,
    pub t1_b: Option<f64>,
    pub tphi_a: Option<f64>,
    pub tphi_b: Option<f64>,
    pub t1_ge: Option<f64>,
    pub tphi_ge: Option<f64>,
    pub t1_fe: Option<f64>,
    pub tphi_gf: Option<f64>,
    pub nth_a: f64,
    pub nth_b: f64,
    pub nth_q: f64,
    pub thermal: bool,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self::measured()
    }
}

impl NoiseParams {
    /// Measured device values (cavity dephasing left off).
    pub fn measured() -> Self {
        Self {
            t1_a: Some(347.0),
            t1_b: Some(108.5),
            tphi_a: None,
            tphi_b: None,
            t1_ge: Some(42.4),
            tphi_ge: Some(tphi_from_t2r(42.4, 33.1)),
            t1_fe: None,
            tphi_gf: None,
            nth_a: 0.0382,
            nth_b: 0.0053,
            nth_q: 0.0052,
            thermal: false,
        }
    }

    pub fn none() -> Self {
        Self {
            t1_a: None,
            t1_b: None,
            tphi_a: None,
            tphi_b: None,
            t1_ge: None,
            tphi_ge: None,
            t1_fe: None,
            tphi_gf: None,
            nth_a: 0.0,
            nth_b: 0.0,
            nth_q: 0.0,
            thermal: false,
        }
    }

    pub fn without_cavities(mut self) -> Self {
        self.t1_a = None;
        self.t1_b = None;
        self.tphi_a = None;
        self.tphi_b = None;
        self
    }

    pub fn without_ancilla(mut self) -> Self {
        self.t1_ge = None;
        self.tphi_ge = None;
        self.t1_fe = None;
        self.tphi_gf = None;
        self
    }

    pub fn is_noiseless(&self) -> bool {
        [self.t1_a, self.t1_b, self.tphi_a, self.tphi_b, self.t1_ge, self.tphi_ge, self.t1_fe, self.tphi_gf]
            .iter()
            .all(Option::is_none)
    }

    pub fn t1_fe_effective(&self) -> Option<f64> {
        self.t1_fe.or(self.t1_ge.map(|t| t / 2.0))
    }

    pub fn tphi_gf_effective(&self) -> Option<f64> {
        self.tphi_gf.or(self.tphi_ge.map(|t| t / 4.0))
    }

    pub fn validate(&self) -> Result<()> {
        let times = [
            ("t1_a", self.t1_a),
            ("t1_b", self.t1_b),
            ("tphi_a", self.tphi_a),
            ("tphi_b", self.tphi_b),
            ("t1_ge", self.t1_ge),
            ("tphi_ge", self.tphi_ge),
            ("t1_fe", self.t1_fe),
            ("tphi_gf", self.tphi_gf),
        ];
        for (name, v) in times {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
                }
            }
        }
        for (name, n) in [("nth_a", self.nth_a), ("nth_b", self.nth_b), ("nth_q", self.nth_q)] {
            if !(0.0..1.0).contains(&n) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1), got {n}")));
            }
        }
        Ok(())
    }
}

/// One jump operator L = √rate · operator.
#[derive(Clone, Debug)]
pub struct Collapse {
    pub label: &'static str,
    pub operator: OperatorMatrix,
    pub rate: f64,
}

#[derive(Clone, Debug, Default)]
pub struct CollapseSet {
    pub entries: Vec<Collapse>,
}

impl CollapseSet {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// √rate · operator for each entry.
    pub fn jump_matrices(&self) -> Vec<CMatrix> {
        self.entries.iter().map(|c| c.operator.matrix() * C64::new(c.rate.sqrt(), 0.0)).collect()
    }
}

/// Jump operators from coherence times. Dephasing uses L = √(2/Tφ)|e⟩⟨e| so
/// that ge coherences decay at 1/Tφ.
pub fn collapse_operators(noise: &NoiseParams, layout: ModeLayout) -> Result<CollapseSet> {
    noise.validate()?;
    let ops = build_mode_operators(layout)?;
    let mut entries = Vec::new();
    let mut push = |label, operator: OperatorMatrix, rate: f64| {
        if rate > 0.0 {
            entries.push(Collapse { label, operator, rate });
        }
    };
    if let Some(t1) = noise.t1_a {
        push("cavity_a_decay", ops.a.clone(), 1.0 / t1);
        if noise.thermal {
            push("cavity_a_heating", ops.a.dagger(), noise.nth_a / t1);
        }
    }
    if let Some(t1) = noise.t1_b {
        push("cavity_b_decay", ops.b.clone(), 1.0 / t1);
        if noise.thermal {
            push("cavity_b_heating", ops.b.dagger(), noise.nth_b / t1);
        }
    }
    if let Some(t) = noise.tphi_a {
        push("cavity_a_dephasing", ops.n_a.clone(), 2.0 / t);
    }
    if let Some(t) = noise.tphi_b {
        push("cavity_b_dephasing", ops.n_b.clone(), 2.0 / t);
    }
    if let Some(t1) = noise.t1_ge {
        push("ancilla_decay_eg", crate::hilbert::ancilla_transition(&layout, Level::G, Level::E)?, 1.0 / t1);
        if noise.thermal {
            push("ancilla_heating_ge", crate::hilbert::ancilla_transition(&layout, Level::E, Level::G)?, noise.nth_q / t1);
        }
    }
    if layout.dim_q == 3 {
        if let Some(t1) = noise.t1_fe_effective() {
            push("ancilla_decay_fe", crate::hilbert::ancilla_transition(&layout, Level::E, Level::F)?, 1.0 / t1);
        }
        // One diagonal operator diag(0, √(2/Tφ_ge), √(2/Tφ_gf)) reproduces
        // both the ge and gf coherence decay rates.
        let le = noise.tphi_ge.map_or(0.0, |t| (2.0 / t).sqrt());
        let lf = noise.tphi_gf_effective().map_or(0.0, |t| (2.0 / t).sqrt());
        let rate = le.max(lf).powi(2);
        if rate > 0.0 {
            let s = rate.sqrt();
            let mut d = CMatrix::zeros(3, 3);
            d[(1, 1)] = C64::new(le / s, 0.0);
            d[(2, 2)] = C64::new(lf / s, 0.0);
            let ia = CMatrix::identity(layout.dim_a, layout.dim_a);
            let ib = CMatrix::identity(layout.dim_b, layout.dim_b);
            push("ancilla_dephasing", OperatorMatrix::new(layout, embed(&ia, &ib, &d))?, rate);
        }
    } else if let Some(t) = noise.tphi_ge {
        push("ancilla_dephasing", ops.proj_e.clone(), 2.0 / t);
    }
    Ok(CollapseSet { entries })
}
