//! Abstract scheme specifications and specialization moves.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expected::{self, Bidegree, ExpectedError};

/// `Z(m, r, s, q, z)`: one fat line of multiplicity `m`, `r` general lines,
/// `s` crosses, `q` points and one reduced zig-zag of length `z` (0 = none).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub m: u64,
    pub r: u64,
    pub s: u64,
    pub q: u64,
    pub z: u64,
}

impl SchemeSpec {
    pub const fn new(m: u64, r: u64, s: u64, q: u64, z: u64) -> Self {
        Self { m, r, s, q, z }
    }

    pub fn is_canonical(&self) -> bool {
        self.z != 1
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z({},{},{},{},{})", self.m, self.r, self.s, self.q, self.z)
    }
}

/// Folds a length-1 zig-zag into the simple lines.
pub fn canonicalize(z: SchemeSpec) -> SchemeSpec {
    if z.z == 1 {
        SchemeSpec { r: z.r + 1, z: 0, ..z }
    } else {
        z
    }
}

/// Point scheme `Omega(p, p_d, p_m, m_pt)` on P^1 x P^1.
///
/// `m_pt = 0` is allowed only together with `p_m = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct OmegaSpec {
    pub p: u64,
    pub p_d: u64,
    pub p_m: u64,
    pub m_pt: u64,
}

impl OmegaSpec {
    pub fn new(p: u64, p_d: u64, p_m: u64, m_pt: u64) -> Self {
        Self { p, p_d, p_m, m_pt }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.p_m != 0 && self.p_m != 2 {
            return Err(format!("p_m must be 0 or 2, got {}", self.p_m));
        }
        if self.p_m == 2 && self.m_pt == 0 {
            return Err("fat points of multiplicity 0".into());
        }
        Ok(())
    }

    /// Largest multiplicity actually present (0 for the empty scheme).
    pub fn max_multiplicity(&self) -> u64 {
        let mut mx = 0;
        if self.p > 0 {
            mx = 1;
        }
        if self.p_d > 0 {
            mx = 2;
        }
        if self.p_m > 0 {
            mx = mx.max(self.m_pt);
        }
        mx
    }

    /// Multiplicities of all points, simple ones first.
    pub fn multiplicities(&self) -> Vec<u64> {
        let mut out = vec![1; self.p as usize];
        out.extend(std::iter::repeat(2).take(self.p_d as usize));
        out.extend(std::iter::repeat(self.m_pt).take(self.p_m as usize));
        out
    }
}

impl fmt::Display for OmegaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Omega({},{},{},{})", self.p, self.p_d, self.p_m, self.m_pt)
    }
}

/// Specialization `R(delta, l, l_s, l_z, t, t_s, t_z)` onto a smooth quadric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SpecMove {
    pub delta: u64,
    pub l: u64,
    pub l_s: u64,
    pub l_z: u64,
    pub t: u64,
    pub t_s: u64,
    pub t_z: u64,
}

impl SpecMove {
    pub const fn new(delta: u64, l: u64, l_s: u64, l_z: u64, t: u64, t_s: u64, t_z: u64) -> Self {
        Self { delta, l, l_s, l_z, t, t_s, t_z }
    }

    /// Lines of one ruling placed on the quadric: `delta m + l + l_s + l_z`.
    pub fn ruling_degree(&self, m: u64) -> u64 {
        self.delta * m + self.l + self.l_s + self.l_z
    }

    /// True when the move splits an existing zig-zag and forms a new one.
    pub fn splits_and_forms_zigzag(&self) -> bool {
        self.l_z > 0 && self.t_z > 0
    }
}

impl fmt::Display for SpecMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "R({},{},{},{},{},{},{})",
            self.delta, self.l, self.l_s, self.l_z, self.t, self.t_s, self.t_z
        )
    }
}

/// The trace of a specialized scheme on the quadric: the ruling divisor has
/// already been removed from the `(d, d)` system, leaving `bidegree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSpec {
    #[serde(flatten)]
    pub bidegree: Bidegree,
    #[serde(flatten)]
    pub omega: OmegaSpec,
    pub ruling_lines_removed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelKind {
    B,
    I,
}

/// `B(k, eps, m)` (bijective) or `I(k, eps, m)` (injective) at `d = 3k + eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemLabel {
    pub kind: LabelKind,
    pub k: u64,
    pub eps: u64,
    pub m: u64,
}

impl SystemLabel {
    pub fn new(kind: LabelKind, k: u64, eps: u64, m: u64) -> Self {
        Self { kind, k, eps, m }
    }

    pub fn from_degree(kind: LabelKind, d: u64, m: u64) -> Self {
        Self { kind, k: d / 3, eps: d % 3, m }
    }

    pub fn degree(&self) -> u64 {
        3 * self.k + self.eps
    }
}

impl fmt::Display for SystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            LabelKind::B => "B",
            LabelKind::I => "I",
        };
        write!(f, "{kind}({},{},{})", self.k, self.eps, self.m)
    }
}

pub fn label_to_scheme(lab: SystemLabel) -> Result<SchemeSpec, ExpectedError> {
    if lab.eps > 2 {
        return Err(ExpectedError::BadResidue(lab.eps));
    }
    let (r, q) = expected::split_r_q(lab.degree(), lab.m)?;
    Ok(match lab.kind {
        LabelKind::B => SchemeSpec::new(lab.m, r, 0, q, 0),
        LabelKind::I => SchemeSpec::new(lab.m, r + 1, 0, 0, 0),
    })
}

/// Identifies `z` at degree `d` as a B or I scheme, if it is one.
pub fn scheme_to_label(d: u64, z: &SchemeSpec) -> Option<SystemLabel> {
    [LabelKind::B, LabelKind::I].into_iter().find_map(|kind| {
        let lab = SystemLabel::from_degree(kind, d, z.m);
        match label_to_scheme(lab) {
            Ok(s) if s == *z => Some(lab),
            _ => None,
        }
    })
}

/// A failed [`SpecMove`] constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    DeltaTooLarge { delta: u64 },
    LinesExceedR { l: u64, r: u64 },
    CrossLinesExceedS { l_s: u64, s: u64 },
    ZigzagSplit { l_z: u64, expected: u64 },
    PointsExceedQ { t: u64, q: u64 },
    LinePoolExhausted { needed: u64, available: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DeltaTooLarge { delta } => write!(f, "delta = {delta} > 1"),
            Violation::LinesExceedR { l, r } => write!(f, "l > r ({l} > {r})"),
            Violation::CrossLinesExceedS { l_s, s } => write!(f, "l_s > s ({l_s} > {s})"),
            Violation::ZigzagSplit { l_z, expected } => {
                write!(f, "l_z != floor(z/2) ({l_z} != {expected})")
            }
            Violation::PointsExceedQ { t, q } => write!(f, "t > q ({t} > {q})"),
            Violation::LinePoolExhausted { needed, available } => write!(
                f,
                "2 t_s + t_z + 1 > r - l ({needed} > {available})"
            ),
        }
    }
}

pub fn validate_move(z: &SchemeSpec, mv: &SpecMove) -> Vec<Violation> {
    let mut out = Vec::new();
    if mv.delta > 1 {
        out.push(Violation::DeltaTooLarge { delta: mv.delta });
    }
    if mv.l > z.r {
        out.push(Violation::LinesExceedR { l: mv.l, r: z.r });
    }
    if mv.l_s > z.s {
        out.push(Violation::CrossLinesExceedS { l_s: mv.l_s, s: z.s });
    }
    if mv.l_z != z.z / 2 {
        out.push(Violation::ZigzagSplit { l_z: mv.l_z, expected: z.z / 2 });
    }
    if mv.t > z.q {
        out.push(Violation::PointsExceedQ { t: mv.t, q: z.q });
    }
    let needed = 2 * mv.t_s + mv.t_z + 1;
    let available = z.r.saturating_sub(mv.l);
    if needed > available {
        out.push(Violation::LinePoolExhausted { needed, available });
    }
    out
}
