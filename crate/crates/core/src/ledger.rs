//! Symbolic degeneration calculus: residuals and traces of specializations
//! onto a smooth quadric, and the specialization sequences that reduce each
//! B/I system to a smaller one.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expected::{
    binomial, d0, expected_h0_p3, lenarcik_special, split_r_q, vdim_p1p1, Bidegree,
    ExpectedError,
};
use crate::interp::{p1p1_h0, PrimeField};
use crate::schemes::{
    canonicalize, label_to_scheme, scheme_to_label, validate_move, LabelKind, OmegaSpec,
    SchemeSpec, SpecMove, SystemLabel, TraceSpec,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("negative component {field} = {value}")]
    NegativeComponent { field: &'static str, value: i128 },
    #[error("ruling overflow: {needed} ruling lines exceed degree {d}")]
    RulingOverflow { d: u64, needed: u64 },
    #[error("no integral t_z solution at step {step} (vdim at t_z = 0 is {vdim_at_zero}, pool allows {max})")]
    NoIntegralTz { step: usize, vdim_at_zero: i64, max: i64 },
    #[error("degree {d} is below d0({m}) = {threshold}")]
    BelowThreshold { d: u64, m: u64, threshold: u64 },
    #[error("no sequence is defined for {0}")]
    UnsupportedCase(String),
    #[error(transparent)]
    Expected(#[from] ExpectedError),
}

pub type Result<T> = std::result::Result<T, LedgerError>;

fn nonneg(field: &'static str, value: i128) -> Result<u64> {
    u64::try_from(value).map_err(|_| LedgerError::NegativeComponent { field, value })
}

/// `Res_Q(Z')` for the specialization `mv` of `z`, canonicalized.
pub fn residual(z: &SchemeSpec, mv: &SpecMove) -> Result<SchemeSpec> {
    let [m, r, s, q, zz] = [z.m, z.r, z.s, z.q, z.z].map(i128::from);
    let [delta, l, l_s, l_z, t, t_s, t_z] =
        [mv.delta, mv.l, mv.l_s, mv.l_z, mv.t, mv.t_s, mv.t_z].map(i128::from);
    let raw = SchemeSpec {
        m: nonneg("m", m - delta)?,
        r: nonneg("r", r - l + l_s + (zz - l_z) - 2 * t_s - (t_z + 1))?,
        s: nonneg("s", s - l_s + t_s)?,
        q: nonneg("q", q - t)?,
        z: nonneg("z", t_z + 1)?,
    };
    Ok(canonicalize(raw))
}

/// `Tr_Q(Z')` at degree `d`, with the ruling divisor already subtracted from
/// the `(d, d)` system.
pub fn trace(z: &SchemeSpec, mv: &SpecMove, d: u64) -> Result<TraceSpec> {
    let removed = mv.ruling_degree(z.m);
    if d < removed {
        return Err(LedgerError::RulingOverflow { d, needed: removed });
    }
    let [r, s, zz] = [z.r, z.s, z.z].map(i128::from);
    let [delta, l, l_s, l_z, t, t_s, t_z] =
        [mv.delta, mv.l, mv.l_s, mv.l_z, mv.t, mv.t_s, mv.t_z].map(i128::from);
    let gamma = i128::from(mv.l_z > 0);
    let p = 2 * r - 2 * l - 2 * l_z - 3 * l_s - 2 * t_s - 2 * t_z + t + 4 * s + zz + gamma;
    let mut p_m = nonneg("p_m", 2 - 2 * delta)?;
    // multiplicity-0 points impose nothing
    if z.m == 0 {
        p_m = 0;
    }
    Ok(TraceSpec {
        bidegree: Bidegree::new(d as i64, (d - removed) as i64),
        omega: OmegaSpec::new(nonneg("p", p)?, mv.t_s + mv.t_z, p_m, z.m),
        ruling_lines_removed: removed,
    })
}

/// How condition (2), vanishing of the trace system, is justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Certificate {
    /// Only simple general points, virtual dimension exactly zero.
    VdimZero,
    /// Only simple general points, negative virtual dimension.
    VdimNegative,
    LenarcikNonspecial,
    TwoFatPointsLemma,
    RankOracle,
    Uncertified,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("enum serializes");
        write!(f, "{}", s.as_str().unwrap_or("?"))
    }
}

/// Hypotheses under which two general `m`-fold points impose independent
/// conditions on bidegree `(a, b)`: `a <= b`, `a >= k - 1`, `b >= 3k` for
/// some `k >= C(m+1, 3)`. The smallest admissible `k` is the weakest demand.
pub fn two_fat_points_hypotheses(bd: Bidegree, m: u64) -> bool {
    if m < 2 || !bd.is_valid() {
        return false;
    }
    let Bidegree { a, b } = bd.normalized();
    let k = binomial(m + 1, 3) as i64;
    a >= k - 1 && b >= 3 * k
}

/// Certifies `h^0 = 0` for a trace system with the lemma that applies to its
/// point multiplicities.
pub fn certify_trace(tr: &TraceSpec, vdim: i64) -> Certificate {
    if !tr.bidegree.is_valid() || vdim > 0 {
        return Certificate::Uncertified;
    }
    let om = tr.omega;
    let fat = om.p_m > 0 && om.m_pt > 0;
    if om.p_d == 0 && (!fat || om.m_pt == 1) {
        return if vdim == 0 {
            Certificate::VdimZero
        } else {
            Certificate::VdimNegative
        };
    }
    if !fat || om.m_pt <= 2 {
        let doubles = om.p_d + if fat && om.m_pt == 2 { om.p_m } else { 0 };
        let simples = om.p + if fat && om.m_pt == 1 { om.p_m } else { 0 };
        return if lenarcik_special(tr.bidegree, doubles, simples) {
            Certificate::Uncertified
        } else {
            Certificate::LenarcikNonspecial
        };
    }
    if om.p_d == 0 && two_fat_points_hypotheses(tr.bidegree, om.m_pt) {
        Certificate::TwoFatPointsLemma
    } else {
        Certificate::Uncertified
    }
}

/// One scheme `Z_i` of a sequence, with the specialization applied to it.
/// The last step carries no move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerStep {
    pub degree: u64,
    pub scheme: SchemeSpec,
    #[serde(rename = "move")]
    pub mv: Option<SpecMove>,
    pub trace: Option<TraceSpec>,
    pub trace_vdim: Option<i64>,
    pub trace_certificate: Option<Certificate>,
    /// The move both splits an existing zig-zag and forms a new one.
    #[serde(default)]
    pub mixed_zigzag: bool,
}

/// An exact identity the case analysis relies on, evaluated numerically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
    /// Authoritative identities gate conformance; the others record how a
    /// printed closed form compares with the computed sequence.
    pub authoritative: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub label: SystemLabel,
    pub steps: Vec<LedgerStep>,
    pub final_label: Option<SystemLabel>,
    pub expected_final: SystemLabel,
    pub expected_length: usize,
    pub ok: bool,
    pub violations: Vec<String>,
    pub identities: Vec<IdentityCheck>,
    pub notes: Vec<String>,
}

impl SequenceReport {
    /// Number of specializations (the sequence length `u`).
    pub fn length(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn final_step(&self) -> Option<&LedgerStep> {
        self.steps.last()
    }
}

/// The case-table row for `lab`: final label and sequence length.
pub fn case_table(lab: SystemLabel) -> Result<(SystemLabel, usize)> {
    use LabelKind::{B, I};
    let SystemLabel { kind, k, eps, m } = lab;
    let unsupported = || LedgerError::UnsupportedCase(lab.to_string());
    let sub = |x: u64, y: u64| x.checked_sub(y).ok_or_else(unsupported);
    Ok(match (kind, eps) {
        (B, 0) => (SystemLabel::new(B, sub(k, 1)?, 1, sub(m, 1)?), 1),
        (B, 1) => (SystemLabel::new(B, sub(k, 1)?, 0, sub(m, 1)?), 2),
        (B, 2) => (SystemLabel::new(B, k, 0, sub(m, 1)?), 1),
        (I, 0) => (SystemLabel::new(I, sub(k, 2)?, 2, sub(m, 2)?), 2),
        (I, 1) => (SystemLabel::new(I, sub(k, 1)?, 2, sub(m, 1)?), 1),
        (I, 2) => {
            if m < 3 {
                return Err(unsupported());
            }
            let ell = m / 3;
            match m % 3 {
                0 => (SystemLabel::new(B, sub(k + 1, 2 * ell)?, 1, 1), (3 * ell - 1) as usize),
                1 => (SystemLabel::new(B, sub(k, 2 * ell)?, 0, 0), (3 * ell + 1) as usize),
                _ => (SystemLabel::new(B, sub(k, 2 * ell)?, 0, 1), (3 * ell + 1) as usize),
            }
        }
        _ => return Err(ExpectedError::BadResidue(eps).into()),
    })
}

struct Builder {
    degree: u64,
    scheme: SchemeSpec,
    steps: Vec<LedgerStep>,
    notes: Vec<String>,
}

impl Builder {
    fn apply(&mut self, mv: SpecMove) -> Result<()> {
        let tr = trace(&self.scheme, &mv, self.degree)?;
        let vdim = vdim_p1p1(tr.bidegree, &tr.omega);
        let next = residual(&self.scheme, &mv)?;
        self.steps.push(LedgerStep {
            degree: self.degree,
            scheme: self.scheme,
            mv: Some(mv),
            trace: Some(tr),
            trace_vdim: Some(vdim),
            trace_certificate: Some(certify_trace(&tr, vdim)),
            mixed_zigzag: mv.splits_and_forms_zigzag(),
        });
        if self.degree < 2 {
            return Err(LedgerError::NegativeComponent {
                field: "degree",
                value: self.degree as i128 - 2,
            });
        }
        self.degree -= 2;
        self.scheme = next;
        Ok(())
    }

    fn finish(mut self) -> (Vec<LedgerStep>, Vec<String>) {
        self.steps.push(LedgerStep {
            degree: self.degree,
            scheme: self.scheme,
            mv: None,
            trace: None,
            trace_vdim: None,
            trace_certificate: None,
            mixed_zigzag: false,
        });
        (self.steps, self.notes)
    }
}

fn signed_sub(field: &'static str, a: i128, b: i128) -> Result<u64> {
    nonneg(field, a - b)
}

/// `t_{z_p}` as printed for the zig-zag chain; kept only for comparison.
fn printed_tz(k: u64, m: u64, p: u64) -> i128 {
    let (k, m, p) = (k as i128, m as i128, p as i128);
    let cubic = (p - 1) * p * (p + 1) / 3;
    if p % 3 != 0 {
        k + p * m * (m - p) + cubic - 2 * p + 1
    } else {
        p * m * (p - m) + cubic - 2 * p + 2 * p / 3
    }
}

/// Builds the specialization sequence the case analysis prescribes for `lab`
/// and audits it with [`verify_sequence`].
pub fn build_sequence(lab: SystemLabel) -> Result<SequenceReport> {
    let d = lab.degree();
    let m = lab.m;
    if lab.eps > 2 {
        return Err(ExpectedError::BadResidue(lab.eps).into());
    }
    if m < 1 {
        return Err(LedgerError::UnsupportedCase(lab.to_string()));
    }
    if d < d0(m) {
        return Err(LedgerError::BelowThreshold { d, m, threshold: d0(m) });
    }
    let (expected_final, expected_length) = case_table(lab)?;
    let mut b = Builder {
        degree: d,
        scheme: label_to_scheme(lab)?,
        steps: Vec::new(),
        notes: Vec::new(),
    };
    let (k, mi, ki) = (lab.k, m as i128, lab.k as i128);
    let mm1 = m * (m - 1);

    match (lab.kind, lab.eps) {
        (LabelKind::B, 0) => {
            let l = signed_sub("l", 2 * ki + 1, mi)?;
            b.apply(SpecMove::new(1, l, 0, 0, mm1, 0, 0))?;
        }
        (LabelKind::B, 1) => {
            let l = signed_sub("l", 2 * ki + 1, mi)?;
            b.apply(SpecMove::new(1, l, 0, 0, mm1, 2 * k, 0))?;
            b.apply(SpecMove::new(0, 1, 2 * k, 0, 0, 0, 0))?;
        }
        (LabelKind::B, 2) => {
            let l = signed_sub("l", 2 * ki + 2, mi)?;
            b.apply(SpecMove::new(1, l, 0, 0, k + 1 + mm1, 0, 0))?;
        }
        (LabelKind::I, 0) => {
            let l = signed_sub("l", 2 * ki + 1, mi)?;
            let t_z = signed_sub("t_z", mm1 as i128, 2)?;
            b.apply(SpecMove::new(1, l, 0, 0, 0, 0, t_z))?;
            let half = signed_sub("l_z", (mm1 / 2) as i128, 1)?;
            let l = signed_sub("l", 2 * ki + 1 - mi, half as i128)?;
            b.apply(SpecMove::new(1, l, 0, half, 0, 0, 0))?;
        }
        (LabelKind::I, 1) => {
            let l = signed_sub("l", 2 * ki + 2, mi)?;
            b.apply(SpecMove::new(1, l, 0, 0, 0, 0, 0))?;
        }
        (LabelKind::I, 2) => build_zigzag_chain(&mut b, lab)?,
        _ => unreachable!("eps checked above"),
    }

    let (steps, notes) = b.finish();
    let final_step = steps.last().expect("finish pushes the final scheme");
    let final_label = scheme_to_label(final_step.degree, &final_step.scheme);
    let mut rep = SequenceReport {
        label: lab,
        steps,
        final_label,
        expected_final,
        expected_length,
        ok: false,
        violations: Vec::new(),
        identities: Vec::new(),
        notes,
    };
    rep.identities = closing_identities(&rep)?;
    verify_sequence(&mut rep);
    Ok(rep)
}

fn build_zigzag_chain(b: &mut Builder, lab: SystemLabel) -> Result<()> {
    let (k, m) = (lab.k, lab.m);
    let (ki, mi) = (k as i128, m as i128);
    let ell = m / 3;
    let base_l = 2 * ki + 2 - mi;

    let first_tz = k + m * (m - 1) + 1;
    b.apply(SpecMove::new(1, nonneg("l", base_l)?, 0, 0, 0, 0, first_tz))?;

    // chain moves p = 2, ..., last; the subcase decides where it stops
    let last = if m % 3 == 1 { m - 1 } else { m - 2 };
    let mut t_z_prev = first_tz;
    for p in 2..=last {
        let l_z = (t_z_prev + 1) / 2;
        let l = signed_sub("l", base_l - ((p - 1) / 3) as i128, l_z as i128)?;
        let probe = SpecMove::new(1, l, 0, l_z, 0, 0, 0);
        let tr = trace(&b.scheme, &probe, b.degree)?;
        // each unit of t_z trades two simple points for one double point,
        // lowering the virtual dimension by exactly one
        let vdim_at_zero = vdim_p1p1(tr.bidegree, &tr.omega);
        let pool = b.scheme.r as i64 - l as i64 - 1;
        if vdim_at_zero < 0 || vdim_at_zero > pool {
            return Err(LedgerError::NoIntegralTz {
                step: b.steps.len(),
                vdim_at_zero,
                max: pool,
            });
        }
        let t_z = vdim_at_zero as u64;
        let printed = printed_tz(k, m, p);
        if printed != t_z as i128 {
            b.notes.push(format!(
                "t_z for p = {p}: solved {t_z}, printed closed form gives {printed}"
            ));
        }
        b.apply(SpecMove { t_z, ..probe })?;
        t_z_prev = t_z;
    }

    let l_z = (t_z_prev + 1) / 2;
    let shift = if m % 3 == 0 { ell as i128 - 1 } else { ell as i128 };
    let l = signed_sub("l", base_l - shift + 1, l_z as i128)?;
    b.apply(SpecMove::new(1, l, 0, l_z, 0, 0, 0))
}

fn rational(twice: i128) -> String {
    if twice % 2 == 0 {
        (twice / 2).to_string()
    } else {
        format!("{twice}/2")
    }
}

fn r_of(d: i128, m: u64) -> Result<i128> {
    let d = nonneg("degree", d)?;
    Ok(split_r_q(d, m)?.0 as i128)
}

fn q_of(d: i128, m: u64) -> Result<i128> {
    let d = nonneg("degree", d)?;
    Ok(split_r_q(d, m)?.1 as i128)
}

fn identity(name: &str, lhs: i128, rhs: i128, authoritative: bool) -> IdentityCheck {
    IdentityCheck {
        name: name.to_string(),
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        holds: lhs == rhs,
        authoritative,
    }
}

/// Identities the injective cases rely on. For the zig-zag subcases the
/// residual line count is taken from the built sequence; the printed closed
/// forms are evaluated literally and recorded as non-authoritative.
pub fn closing_identities(rep: &SequenceReport) -> Result<Vec<IdentityCheck>> {
    let lab = rep.label;
    if lab.kind != LabelKind::I {
        return Ok(Vec::new());
    }
    let (k, m) = (lab.k as i128, lab.m);
    let mi = m as i128;
    let d = lab.degree() as i128;
    let mut out = Vec::new();
    match lab.eps {
        0 => {
            let lhs = r_of(3 * k, m)? + 1 - 2 * (2 * k + 1 - mi);
            let rhs = r_of(3 * (k - 2) + 2, m - 2)? + 1;
            out.push(identity("r(3k,m)+1-2(2k+1-m) = r(3(k-2)+2,m-2)+1", lhs, rhs, true));
        }
        1 => {
            let lhs = r_of(3 * k + 1, m)? + 1 - (2 * k + 2 - mi);
            let rhs = r_of(3 * (k - 1) + 2, m - 1)? + 1;
            out.push(identity("r(3k+1,m)+1-(2k+2-m) = r(3(k-1)+2,m-1)+1", lhs, rhs, true));
        }
        2 => {
            let Some(last) = rep.final_step() else {
                return Ok(out);
            };
            let ell = (m / 3) as i128;
            let r0 = r_of(d, m)?;
            let (target_d, target_m) = match m % 3 {
                0 => (3 * (k - 2 * ell + 1) + 1, 1),
                1 => (3 * (k - 2 * ell), 0),
                _ => (3 * (k - 2 * ell), 1),
            };
            let target_r = r_of(target_d, target_m)?;
            out.push(identity(
                "final residual r = r(target degree, target m)",
                last.scheme.r as i128,
                target_r,
                true,
            ));
            out.push(identity("q(target degree, target m) = 0", q_of(target_d, target_m)?, 0, true));
            // printed forms, doubled to stay integral
            let (name, twice_lhs) = match m % 3 {
                0 => (
                    "printed: r(3k+2,3l)+21/2 l-23/2 l+3-6kl+2k = r(3(k-2l+1)+1,1)",
                    2 * r0 + 21 * ell - 23 * ell + 6 - 12 * k * ell + 4 * k,
                ),
                1 => (
                    "printed: r(3k+2,3l+1)+21/2 l^2-1/2 l-1-6kl-2k = r(3(k-2l),0)",
                    2 * r0 + 21 * ell * ell - ell - 2 - 12 * k * ell - 4 * k,
                ),
                _ => (
                    "printed: r(3k+2,3l+2)+21/2 l^2+5/2 l-6kl-2k = r(3(k-2l),1)",
                    2 * r0 + 21 * ell * ell + 5 * ell - 12 * k * ell - 4 * k,
                ),
            };
            out.push(IdentityCheck {
                name: name.to_string(),
                lhs: rational(twice_lhs),
                rhs: target_r.to_string(),
                holds: twice_lhs == 2 * target_r,
                authoritative: false,
            });
        }
        _ => {}
    }
    Ok(out)
}

/// Audits a sequence report: residual chaining, degree bookkeeping, trace
/// recomputation, certificates, and the terminal conditions. Sets `ok` and
/// `violations` on the report and returns `ok`.
pub fn verify_sequence(rep: &mut SequenceReport) -> bool {
    let mut v = Vec::new();
    let lab = rep.label;
    let d = lab.degree();
    let m = lab.m;

    match (rep.steps.first(), label_to_scheme(lab)) {
        (Some(first), Ok(start)) => {
            if first.scheme != start || first.degree != d {
                v.push(format!("first step {} at degree {} is not {lab}", first.scheme, first.degree));
            }
        }
        (None, _) => v.push("empty sequence".into()),
        (_, Err(e)) => v.push(format!("label {lab}: {e}")),
    }

    let n = rep.steps.len();
    for (i, step) in rep.steps.iter().enumerate() {
        let want_degree = d as i128 - 2 * i as i128;
        if step.degree as i128 != want_degree {
            v.push(format!("step {i}: degree {} but expected {want_degree}", step.degree));
        }
        if i + 1 == n {
            if step.mv.is_some() {
                v.push(format!("step {i}: final scheme carries a move"));
            }
            break;
        }
        let Some(mv) = step.mv else {
            v.push(format!("step {i}: missing move"));
            continue;
        };
        for bad in validate_move(&step.scheme, &mv) {
            v.push(format!("step {i}: {bad}"));
        }
        match residual(&step.scheme, &mv) {
            Ok(res) if res == rep.steps[i + 1].scheme => {}
            Ok(res) => v.push(format!(
                "step {}: scheme {} is not the residual {res}",
                i + 1,
                rep.steps[i + 1].scheme
            )),
            Err(e) => v.push(format!("step {i}: residual fails: {e}")),
        }
        match trace(&step.scheme, &mv, step.degree) {
            Ok(tr) => {
                let vdim = vdim_p1p1(tr.bidegree, &tr.omega);
                if step.trace != Some(tr) {
                    v.push(format!("step {i}: recorded trace differs from recomputed trace"));
                }
                if step.trace_vdim != Some(vdim) {
                    v.push(format!(
                        "step {i}: recorded vdim {:?} differs from recomputed {vdim}",
                        step.trace_vdim
                    ));
                }
                match step.trace_certificate {
                    None | Some(Certificate::Uncertified) => {
                        if vdim > 0 {
                            v.push(format!("step {i}: trace cannot vanish (vdim {vdim} > 0)"))
                        } else {
                            v.push(format!("step {i}: trace vanishing is uncertified (vdim {vdim})"))
                        }
                    }
                    Some(Certificate::RankOracle) => {}
                    Some(c) => {
                        let fresh = certify_trace(&tr, vdim);
                        if fresh != c {
                            v.push(format!("step {i}: certificate {c} does not apply (got {fresh})"));
                        }
                    }
                }
            }
            Err(e) => v.push(format!("step {i}: trace fails: {e}")),
        }
    }

    if let Some(last) = rep.steps.last() {
        let u = n - 1;
        match scheme_to_label(last.degree, &last.scheme) {
            Some(fin) => {
                if rep.final_label != Some(fin) {
                    v.push(format!("final label recorded as {:?}, computed {fin}", rep.final_label));
                }
                if fin != rep.expected_final {
                    v.push(format!("sequence ends at {fin}, case table says {}", rep.expected_final));
                }
            }
            None => v.push(format!(
                "final scheme {} at degree {} is neither a B nor an I system",
                last.scheme, last.degree
            )),
        }
        if u != rep.expected_length {
            v.push(format!("length {u}, case table says {}", rep.expected_length));
        }
        let mu = last.scheme.m;
        if last.degree < d0(mu) {
            v.push(format!("final degree {} < d0({mu}) = {}", last.degree, d0(mu)));
        }
        let allowed = [m.checked_sub(1), m.checked_sub(2), Some(1), Some(0)];
        if !allowed.contains(&Some(mu)) {
            v.push(format!("final multiplicity {mu} not in {{m-1, m-2, 1, 0}}"));
        }
    }

    rep.ok = v.is_empty();
    rep.violations = v;
    rep.ok
}

/// Runs the P^1 x P^1 rank oracle on uncertified traces with non-positive
/// virtual dimension and upgrades them to [`Certificate::RankOracle`] when
/// the computed `h^0` vanishes. Re-audits the report afterwards.
pub fn escalate_with_rank_oracle(
    rep: &mut SequenceReport,
    field: PrimeField,
    seed: u64,
    retries: u32,
    max_cols: u64,
) -> bool {
    for step in rep.steps.iter_mut() {
        let (Some(tr), Some(vdim)) = (step.trace, step.trace_vdim) else {
            continue;
        };
        if step.trace_certificate != Some(Certificate::Uncertified) || vdim > 0 {
            continue;
        }
        let cols = (tr.bidegree.a + 1) as u64 * (tr.bidegree.b + 1) as u64;
        if !tr.bidegree.is_valid() || cols > max_cols {
            continue;
        }
        if let Ok(0) = p1p1_h0(tr.bidegree, &tr.omega, field, seed, retries) {
            step.trace_certificate = Some(Certificate::RankOracle);
        }
    }
    verify_sequence(rep)
}

/// Expected-value sides of the Castelnuovo inequality:
/// `(h0(d; Z), h0(d-2; Res) + max(0, vdim Tr))`.
pub fn castelnuovo_bound(d: u64, z: &SchemeSpec, mv: &SpecMove) -> Result<(u64, i64)> {
    if d < 2 {
        return Err(LedgerError::NegativeComponent { field: "degree", value: d as i128 - 2 });
    }
    let lhs = expected_h0_p3(d, z)?;
    let res = residual(z, mv)?;
    let tr = trace(z, mv, d)?;
    let rhs = expected_h0_p3(d - 2, &res)? as i64 + vdim_p1p1(tr.bidegree, &tr.omega).max(0);
    Ok((lhs, rhs))
}

/// Degree-`d` length of the trace on the quadric: `(d+1)^2 - vdim`.
pub fn trace_length(d: u64, tr: &TraceSpec) -> i64 {
    let full = (d as i64 + 1) * (d as i64 + 1);
    full - vdim_p1p1(tr.bidegree, &tr.omega)
}
