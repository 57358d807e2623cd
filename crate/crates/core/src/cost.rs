//! Move costs.
//!
//! A synchronous move with firing probability `w` costs `1 - e^(1 - 1/w)`
//! under the stochastic profile: 0 for a certain activity, approaching 1
//! (the price of a log or model move) as `w` goes to 0.

use std::fmt;
use std::str::FromStr;

use crate::product::{MoveKind, ProductTransition};
use crate::{Error, Result};

pub fn eq1_cost(w: f64) -> Result<f64> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::Domain {
            value: w,
            domain: "(0,1]",
        });
    }
    if w == 1.0 {
        return Ok(0.0);
    }
    Ok(-(1.0 - 1.0 / w).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProfileKind {
    /// Synchronous moves priced by [`eq1_cost`].
    Stochastic,
    /// Classic alignments: synchronous moves are free.
    Deterministic,
    /// Synchronous moves free while the trace stays stochastic: the cheapest
    /// realization, ignoring its probability.
    LowerBound,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 3] = [
        ProfileKind::Stochastic,
        ProfileKind::Deterministic,
        ProfileKind::LowerBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Stochastic => "stochastic",
            ProfileKind::Deterministic => "deterministic",
            ProfileKind::LowerBound => "lower-bound",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProfileKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::parse("profile", format!("unknown profile {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostProfile {
    pub kind: ProfileKind,
    pub tau_model_move_cost: f64,
    pub nonsync_cost: f64,
}

impl CostProfile {
    pub fn new(kind: ProfileKind) -> Self {
        CostProfile {
            kind,
            tau_model_move_cost: 0.0,
            nonsync_cost: 1.0,
        }
    }

    pub fn stochastic() -> Self {
        Self::new(ProfileKind::Stochastic)
    }

    pub fn deterministic() -> Self {
        Self::new(ProfileKind::Deterministic)
    }

    pub fn lower_bound() -> Self {
        Self::new(ProfileKind::LowerBound)
    }

    pub fn sync_cost(&self, weight: f64) -> Result<f64> {
        match self.kind {
            ProfileKind::Stochastic => eq1_cost(weight),
            ProfileKind::Deterministic | ProfileKind::LowerBound => Ok(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (value, name) in [
            (self.tau_model_move_cost, "tau model-move cost"),
            (self.nonsync_cost, "non-synchronous move cost"),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::validation(name, format!("{value} is not a nonnegative number")));
            }
        }
        Ok(())
    }
}

impl Default for CostProfile {
    fn default() -> Self {
        Self::stochastic()
    }
}

pub fn move_cost(t: &ProductTransition, profile: &CostProfile) -> Result<f64> {
    match t.kind {
        MoveKind::Sync => {
            let w = t
                .weight
                .ok_or_else(|| Error::Internal(format!("synchronous move {} has no weight", t.id)))?;
            profile.sync_cost(w)
        }
        MoveKind::LogMove => Ok(profile.nonsync_cost),
        MoveKind::ModelMove => match &t.model_label {
            Some(l) if l.is_tau() => Ok(profile.tau_model_move_cost),
            _ => Ok(profile.nonsync_cost),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::ActivityLabel;

    fn transition(kind: MoveKind, model: Option<ActivityLabel>, weight: Option<f64>) -> ProductTransition {
        ProductTransition {
            id: "x".into(),
            kind,
            model_transition: model.as_ref().map(|_| "m".into()),
            trace_transition: None,
            model_label: model,
            trace_label: None,
            weight,
        }
    }

    #[test]
    fn eq1_reference_values() {
        assert_eq!(eq1_cost(1.0).unwrap(), 0.0);
        // 1 - e^-1 and 1 - e^-0.25, evaluated at 50 digits
        assert!((eq1_cost(0.5).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-12);
        assert!((eq1_cost(0.8).unwrap() - 0.221_199_216_928_595_1).abs() < 1e-12);
        assert!((1.0 - eq1_cost(0.001).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn eq1_domain() {
        for w in [0.0, -0.1, 1.0 + 1e-12, f64::NAN] {
            assert!(matches!(eq1_cost(w), Err(Error::Domain { .. })), "{w}");
        }
    }

    #[test]
    fn move_costs_by_kind() {
        let p = CostProfile::stochastic();
        let sync = transition(MoveKind::Sync, Some(ActivityLabel::named("B")), Some(0.2));
        // 1 - e^-4
        assert!((move_cost(&sync, &p).unwrap() - 0.981_684_361_111_265_8).abs() < 1e-12);
        assert_eq!(move_cost(&sync, &CostProfile::lower_bound()).unwrap(), 0.0);
        let log = transition(MoveKind::LogMove, None, None);
        for kind in ProfileKind::ALL {
            assert_eq!(move_cost(&log, &CostProfile::new(kind)).unwrap(), 1.0);
        }
        let tau = transition(MoveKind::ModelMove, Some(ActivityLabel::Tau), None);
        assert_eq!(move_cost(&tau, &p).unwrap(), 0.0);
        let visible = transition(MoveKind::ModelMove, Some(ActivityLabel::named("A")), None);
        assert_eq!(move_cost(&visible, &p).unwrap(), 1.0);
        let unweighted = transition(MoveKind::Sync, Some(ActivityLabel::named("A")), None);
        assert!(matches!(move_cost(&unweighted, &p), Err(Error::Internal(_))));
    }

    #[test]
    fn profile_names_round_trip() {
        for kind in ProfileKind::ALL {
            assert_eq!(kind.name().parse::<ProfileKind>().unwrap(), kind);
        }
        assert!("fast".parse::<ProfileKind>().is_err());
    }
}
