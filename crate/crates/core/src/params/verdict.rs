//! Attainability verdicts and the results they rest on.

use serde::{Deserialize, Serialize};

use super::{base_violation, near, ParamSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Subcritical,
    Critical,
    BottomSubcritical,
    BottomCritical,
    PurelyCylindrical,
    PurelySpherical,
    Invalid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Attainability {
    Achieved,
    NotAchieved,
    ConditionalOnStrictInequality,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub positive: bool,
    pub regime: Regime,
    pub attainability: Attainability,
    pub condition_note: String,
    pub citations: Vec<String>,
}

impl Verdict {
    fn new(positive: bool, regime: Regime, attainability: Attainability, note: &str, cites: &[&str]) -> Self {
        Verdict {
            positive,
            regime,
            attainability,
            condition_note: note.to_string(),
            citations: cites.iter().map(|c| c.to_string()).collect(),
        }
    }
}

fn is_zero(x: f64) -> bool {
    near(x, 0.0)
}

/// Which of the hypotheses H1-H4 of the `p = 2` critical nonexistence theorem holds.
fn nonexistence_hypothesis(ps: &ParamSet) -> Option<&'static str> {
    let (d, k, a, b) = (ps.d, ps.k, ps.a, ps.b);
    if !(near(ps.p, 2.0) && ps.is_critical() && d >= 3 && a >= 0.0 && b <= 0.0) {
        return None;
    }
    if is_zero(a) && is_zero(b) {
        return None;
    }
    if is_zero(a) {
        Some("Thm 5.3 H1")
    } else if k >= 2 {
        Some("Thm 5.3 H2")
    } else if d >= 4 && a >= 2.0 {
        Some("Thm 5.3 H3")
    } else if d == 3 && a >= 1.0 {
        Some("Thm 5.3 H4")
    } else {
        None
    }
}

/// Known status of the purely cylindrical infimum `M_a(q)`:
/// `Some(true)` achieved, `Some(false)` not achieved, `None` open or conditional.
fn mazya_status(ps: &ParamSet) -> (Option<bool>, Vec<&'static str>) {
    let (d, k, a) = (ps.d, ps.k, ps.a);
    if !ps.is_critical() {
        return (Some(true), vec!["Prop B.1"]);
    }
    if is_zero(a) {
        return (Some(true), vec!["Aubin-Talenti"]);
    }
    if a < 0.0 {
        return (Some(true), vec!["Prop B.1"]);
    }
    if !near(ps.p, 2.0) {
        return (None, vec!["Prop B.1"]);
    }
    if k >= 2 {
        (Some(false), vec!["Prop B.2 i"])
    } else if d >= 4 && a < 2.0 {
        (Some(true), vec!["Prop B.2 ii", "Thm 5.2"])
    } else if d >= 4 {
        (Some(false), vec!["Prop B.2 ii"])
    } else if a >= 1.0 {
        (Some(false), vec!["Prop B.2 iii"])
    } else {
        (None, vec![])
    }
}

fn regime_of(ps: &ParamSet) -> Regime {
    if ps.is_supercritical() {
        Regime::Invalid
    } else if is_zero(ps.b) && is_zero(ps.gamma) {
        Regime::PurelyCylindrical
    } else if is_zero(ps.a) && is_zero(ps.theta()) {
        Regime::PurelySpherical
    } else if ps.is_bottom() {
        if ps.is_critical() {
            Regime::BottomCritical
        } else {
            Regime::BottomSubcritical
        }
    } else if ps.is_critical() {
        Regime::Critical
    } else {
        Regime::Subcritical
    }
}

/// Classifies a tuple: positivity, regime and attainability with citations.
///
/// Unconditional nonexistence takes precedence over unconditional existence,
/// which takes precedence over conditional statements.
pub fn classify(ps: &ParamSet) -> Verdict {
    use Attainability::*;
    if let Err(e) = ps.validate() {
        return Verdict::new(false, Regime::Invalid, Unknown, &e.to_string(), &[]);
    }
    if let Some(cond) = base_violation(ps) {
        return Verdict::new(false, Regime::Invalid, Unknown, &format!("weights not admissible: {cond} fails"), &[]);
    }
    let regime = regime_of(ps);
    if ps.is_supercritical() {
        return Verdict::new(false, regime, NotAchieved, "q > p*: condition a1 fails and the constant is 0", &["Thm 1"]);
    }
    if ps.gamma < ps.b && !ps.is_bottom() {
        return Verdict::new(false, regime, NotAchieved, "gamma < b: condition a2 fails and the constant is 0", &["Thm 1"]);
    }

    let p2 = near(ps.p, 2.0);
    let bottom = ps.is_bottom();
    let crit = ps.is_critical();

    if let Some(h) = nonexistence_hypothesis(ps) {
        let mut cites = vec![h];
        if bottom && ps.b < 0.0 {
            cites.push("Thm 5.1 i");
        }
        if !bottom {
            cites.push("Thm 4.2 i");
        }
        return Verdict::new(true, regime, NotAchieved, "S_{a,b,gamma}(2*) = S", &cites);
    }
    if crit && !bottom && is_zero(ps.a) && is_zero(ps.b) {
        return Verdict::new(true, regime, NotAchieved, "S_{0,0,gamma}(p*) = S for gamma > 0", &["Thm 4.2 i"]);
    }
    if p2 && bottom && ps.b < 0.0 && !is_zero(ps.b) {
        return Verdict::new(
            true,
            regime,
            NotAchieved,
            "b < 0 <= b*: S_{a,b,b}(q) = M_a(q)",
            &["Thm 3 i", "Thm 5.1 i"],
        );
    }

    if !bottom {
        if !crit {
            return Verdict::new(true, regime, Achieved, "gamma > b and q < p*", &["Thm 2 i"]);
        }
        let mut cites = vec!["Thm 2 ii", "Thm 4.2 ii"];
        let mut note = String::from("achieved if S_{a,b,gamma}(p*) < S");
        if !is_zero(ps.a) && ps.a <= ps.b {
            cites.push("Thm 4.3 i");
            note.push_str("; also achieved for gamma in (b, b + eps)");
        } else if is_zero(ps.a) && ps.b > 0.0 {
            cites.push("Thm 4.3 ii");
            note.push_str("; also achieved for gamma in [b, b + eps)");
        }
        let edge = ps.kf() * ps.p / ps.p_star() + ps.a;
        if edge > 0.0 && ps.gamma >= ps.p * ps.h_of(ps.a) {
            cites.push("Thm 4.1 i");
            note.push_str("; achieved for b in (pH_a - eps, pH_a)");
        } else if edge <= 0.0 {
            cites.push("Thm 4.1 ii");
            note.push_str("; achieved for b in (m - eps, m), m = min(pH_a, gamma + kp/p* + a)");
        }
        return Verdict::new(true, regime, ConditionalOnStrictInequality, &note, &cites);
    }

    if is_zero(ps.b) {
        let (status, cites) = mazya_status(ps);
        return match status {
            Some(true) => Verdict::new(true, regime, Achieved, "M_a(q) is attained", &cites),
            Some(false) => Verdict::new(true, regime, NotAchieved, "M_a(2*) = S", &cites),
            None if p2 => Verdict::new(
                true,
                regime,
                Unknown,
                "open: attainability of M_a(2*) for d = 3, k = 1, 0 < a < 1",
                &cites,
            ),
            None => Verdict::new(true, regime, ConditionalOnStrictInequality, "achieved if M_a(p*) < S", &cites),
        };
    }

    if p2 {
        let (status, mut cites) = mazya_status(ps);
        if status == Some(true) {
            let mut all = vec!["Thm 3 ii", "Thm 5.1 i"];
            if crit {
                all.push("Thm 5.2");
            }
            all.append(&mut cites);
            return Verdict::new(true, regime, Achieved, "0 = b* < b < 2H_a", &all);
        }
        return Verdict::new(
            true,
            regime,
            ConditionalOnStrictInequality,
            "achieved iff b > b*, with b* in [0, 2H_a) not determined; also for b in (2H_a - eps, 2H_a)",
            &["Thm 3 ii", "Thm 5.1 i", "Thm 4.4"],
        );
    }

    if crit && is_zero(ps.a) && ps.b > 0.0 {
        return Verdict::new(true, regime, Achieved, "a = 0 < b = gamma at q = p*", &["Thm 4.3 ii"]);
    }
    let mut cites = vec!["Thm 3 ii", "Thm 4.4"];
    let mut note = String::from("achieved if S_{a,b,b}(q) < M_a(q); also for b in (pH_a - eps, pH_a)");
    let (d, k) = (ps.df(), ps.kf());
    if is_zero(ps.a) && ps.b > 0.0 && !crit && ps.p * (d - k) < ps.q * (d - ps.p) {
        cites.push("Thm 4.5");
        note.push_str("; also for b in (0, eps)");
    }
    Verdict::new(true, regime, ConditionalOnStrictInequality, &note, &cites)
}
