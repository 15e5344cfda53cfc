//! Excess-noise functions `h(m) = 1 - H_{m,m+1}` of the supported phase
//! measurements.
//!
//! A measurement enters the phase variance only through the coherence it
//! retains between adjacent number states, so every scheme is reduced to a
//! single sequence `h(m)` with a large-`m` power law `h(m) ~ c m^-p`.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Default crossover from the exact heterodyne formula to its series.
pub const HETERODYNE_M_SWITCH: u64 = 12;
/// Default index below which mark I uses only its leading term.
pub const MARK_M_SWITCH: u64 = 10;

/// Mark I second and third asymptotic coefficients (of `m^-1`, `m^-3/2`).
pub const MARK_I_C2: f64 = -0.101562;
pub const MARK_I_C3: f64 = -0.0508;

/// Coefficients of `h_het(m)` in powers of `1/(m+1)`, orders 1..=12.
///
/// Obtained from the Bernoulli-polynomial expansion of
/// `ln Γ(x + 1/2) - ln Γ(x)`; all denominators are powers of two so every
/// entry is exact in `f64`.
const HET_SERIES: [f64; 12] = [
    1.0 / 8.0,
    -1.0 / 128.0,
    -5.0 / 1024.0,
    21.0 / 32768.0,
    399.0 / 262144.0,
    -869.0 / 4194304.0,
    -39325.0 / 33554432.0,
    334477.0 / 2147483648.0,
    28717403.0 / 17179869184.0,
    -59697183.0 / 274877906944.0,
    -8400372435.0 / 2199023255552.0,
    34429291905.0 / 70368744177664.0,
];

/// Highest order available from [`h_het_series`].
pub const HET_SERIES_MAX_ORDER: usize = HET_SERIES.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Canonical,
    Heterodyne,
    MarkI,
    MarkII,
    PowerLaw,
    Tabulated,
}

/// Leading large-`m` behaviour `h(m) ≈ c m^-p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTail {
    pub c: f64,
    pub p: f64,
}

impl PowerTail {
    pub fn new(c: f64, p: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidScheme(format!(
                "power-law tail needs c > 0 and p > 0 (got c={c}, p={p})"
            )));
        }
        Ok(Self { c, p })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.c * x.powf(-self.p)
    }

    /// `√(c p (p+1))`, the asymptotic value of the z parameter.
    pub fn z_asymptote(&self) -> f64 {
        (self.c * self.p * (self.p + 1.0)).sqrt()
    }
}

/// A phase-measurement scheme described by its excess-noise function.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeModel {
    kind: SchemeKind,
    tail: Option<PowerTail>,
    /// (m, h) pairs with strictly increasing m, only for `Tabulated`.
    table: Vec<(u64, f64)>,
    m_switch: u64,
}

impl SchemeModel {
    pub fn canonical() -> Self {
        Self {
            kind: SchemeKind::Canonical,
            tail: None,
            table: Vec::new(),
            m_switch: 0,
        }
    }

    pub fn heterodyne() -> Self {
        Self {
            kind: SchemeKind::Heterodyne,
            tail: Some(PowerTail { c: 0.125, p: 1.0 }),
            table: Vec::new(),
            m_switch: HETERODYNE_M_SWITCH,
        }
    }

    pub fn mark_i() -> Self {
        Self {
            kind: SchemeKind::MarkI,
            tail: Some(PowerTail { c: 0.125, p: 0.5 }),
            table: Vec::new(),
            m_switch: MARK_M_SWITCH,
        }
    }

    pub fn mark_ii() -> Self {
        Self {
            kind: SchemeKind::MarkII,
            tail: Some(PowerTail {
                c: 1.0 / 16.0,
                p: 1.5,
            }),
            table: Vec::new(),
            m_switch: MARK_M_SWITCH,
        }
    }

    pub fn power_law(c: f64, p: f64) -> Result<Self> {
        Ok(Self {
            kind: SchemeKind::PowerLaw,
            tail: Some(PowerTail::new(c, p)?),
            table: Vec::new(),
            m_switch: 1,
        })
    }

    /// Tabulated scheme from `(m, h)` pairs; `tail` is used beyond the table.
    pub fn tabulated(table: Vec<(u64, f64)>, tail: Option<PowerTail>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidScheme("empty h table".into()));
        }
        if table[0].0 != 0 {
            return Err(Error::InvalidScheme("h table must start at m = 0".into()));
        }
        for w in table.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidScheme(format!(
                    "h table m values not strictly increasing at m = {}",
                    w[1].0
                )));
            }
        }
        if let Some((m, h)) = table.iter().find(|(_, h)| !(0.0..=1.0).contains(h)) {
            return Err(Error::InvalidScheme(format!("h({m}) = {h} outside [0, 1]")));
        }
        Ok(Self {
            kind: SchemeKind::Tabulated,
            tail,
            table,
            m_switch: 0,
        })
    }

    /// Override the small-m/asymptotic crossover.
    pub fn with_m_switch(mut self, m_switch: u64) -> Self {
        self.m_switch = m_switch;
        self
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn tail(&self) -> Option<PowerTail> {
        self.tail
    }

    pub fn m_switch(&self) -> u64 {
        self.m_switch
    }

    pub fn table(&self) -> &[(u64, f64)] {
        &self.table
    }

    pub fn is_canonical(&self) -> bool {
        self.kind == SchemeKind::Canonical
    }

    /// Short identifier used in CSV output.
    pub fn name(&self) -> String {
        match self.kind {
            SchemeKind::Canonical => "canonical".into(),
            SchemeKind::Heterodyne => "heterodyne".into(),
            SchemeKind::MarkI => "markI".into(),
            SchemeKind::MarkII => "markII".into(),
            SchemeKind::PowerLaw => {
                let t = self.tail.expect("power law always has a tail");
                format!("power:{}:{}", t.c, t.p)
            }
            SchemeKind::Tabulated => match self.tail {
                Some(t) => format!("table:{}:{}", t.c, t.p),
                None => "table".into(),
            },
        }
    }

    /// Excess noise at integer photon number `m`, clamped to `[0, 1]`.
    pub fn h(&self, m: u64) -> f64 {
        let raw = match self.kind {
            SchemeKind::Canonical => 0.0,
            SchemeKind::Heterodyne => {
                if m < self.m_switch {
                    h_het_exact(m)
                } else {
                    het_series_at(m as f64 + 1.0, HET_SERIES_MAX_ORDER)
                }
            }
            SchemeKind::MarkI => {
                if m == 0 {
                    1.0
                } else {
                    mark_i_at(m as f64, m >= self.m_switch)
                }
            }
            SchemeKind::MarkII | SchemeKind::PowerLaw => {
                if m == 0 {
                    1.0
                } else {
                    self.tail.unwrap().eval(m as f64)
                }
            }
            SchemeKind::Tabulated => self.table_at(m as f64),
        };
        raw.clamp(0.0, 1.0)
    }

    /// Excess noise at a real-valued photon number, for the continuum
    /// solver. Agrees with [`Self::h`] at integers except for the tabulated
    /// kind, which is linearly interpolated.
    pub fn h_real(&self, x: f64) -> f64 {
        let raw = match self.kind {
            SchemeKind::Canonical => 0.0,
            SchemeKind::Heterodyne => {
                if x < self.m_switch as f64 {
                    h_het_exact_real(x.max(0.0))
                } else {
                    het_series_at(x + 1.0, HET_SERIES_MAX_ORDER)
                }
            }
            SchemeKind::MarkI => {
                if x <= 0.0 {
                    1.0
                } else {
                    mark_i_at(x, x >= self.m_switch as f64)
                }
            }
            SchemeKind::MarkII | SchemeKind::PowerLaw => {
                if x <= 0.0 {
                    1.0
                } else {
                    self.tail.unwrap().eval(x)
                }
            }
            SchemeKind::Tabulated => self.table_at(x),
        };
        raw.clamp(0.0, 1.0)
    }

    fn table_at(&self, x: f64) -> f64 {
        let (m_last, h_last) = *self.table.last().unwrap();
        if x > m_last as f64 {
            return match self.tail {
                Some(t) => t.eval(x),
                None => h_last,
            };
        }
        let idx = self.table.partition_point(|&(m, _)| (m as f64) <= x);
        // idx >= 1 because table starts at m = 0 and x >= 0
        let (m0, h0) = self.table[idx - 1];
        if m0 as f64 == x || idx == self.table.len() {
            return h0;
        }
        let (m1, h1) = self.table[idx];
        let t = (x - m0 as f64) / (m1 - m0) as f64;
        h0 + t * (h1 - h0)
    }
}

impl fmt::Display for SchemeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn mark_i_at(x: f64, full: bool) -> f64 {
    let lead = 0.125 / x.sqrt();
    if full {
        lead + MARK_I_C2 / x + MARK_I_C3 / (x * x.sqrt())
    } else {
        lead
    }
}

/// `(c, p)` of the large-m power law. Canonical returns `(0, 0)`.
pub fn leading_params(scheme: &SchemeModel) -> Result<(f64, f64)> {
    match (scheme.kind, scheme.tail) {
        (SchemeKind::Canonical, _) => Ok((0.0, 0.0)),
        (_, Some(t)) => Ok((t.c, t.p)),
        (_, None) => Err(Error::MissingTail),
    }
}

/// `1 - Γ(m+3/2) / √(Γ(m+1) Γ(m+2))` through log-gamma.
pub fn h_het_exact(m: u64) -> f64 {
    h_het_exact_real(m as f64)
}

fn h_het_exact_real(x: f64) -> f64 {
    let log_ratio = libm::lgamma(x + 1.5) - 0.5 * (libm::lgamma(x + 1.0) + libm::lgamma(x + 2.0));
    -log_ratio.exp_m1()
}

/// Asymptotic series of `h_het(m)` in `1/(m+1)` truncated after `order` terms.
pub fn h_het_series(m: u64, order: usize) -> Result<f64> {
    if order == 0 || order > HET_SERIES_MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "heterodyne series order must be in 1..={HET_SERIES_MAX_ORDER} (got {order})"
        )));
    }
    Ok(het_series_at(m as f64 + 1.0, order))
}

fn het_series_at(x: f64, order: usize) -> f64 {
    let t = 1.0 / x;
    let acc = HET_SERIES[..order]
        .iter()
        .rev()
        .fold(0.0, |acc, &coef| acc * t + coef);
    acc * t
}

/// Reads an `m,h` table. Blank lines and `#` comments are ignored.
pub fn load_h_table(path: impl AsRef<Path>, tail: Option<PowerTail>) -> Result<SchemeModel> {
    let text = fs::read_to_string(path)?;
    let table = parse_h_table(&text)?;
    SchemeModel::tabulated(table, tail)
}

pub fn parse_h_table(text: &str) -> Result<Vec<(u64, f64)>> {
    let mut rows: Vec<(u64, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::TableParse { line: line_no, msg };
        let (m_s, h_s) = line
            .split_once(',')
            .ok_or_else(|| err(format!("expected 'm,h', got '{line}'")))?;
        let m: u64 = m_s
            .trim()
            .parse()
            .map_err(|_| err(format!("bad photon number '{}'", m_s.trim())))?;
        let h: f64 = h_s
            .trim()
            .parse()
            .map_err(|_| err(format!("bad h value '{}'", h_s.trim())))?;
        if !(0.0..=1.0).contains(&h) {
            return Err(err(format!("h = {h} outside [0, 1]")));
        }
        match rows.last() {
            None if m != 0 => return Err(err(format!("table must start at m = 0, got {m}"))),
            Some(&(prev, _)) if m <= prev => {
                return Err(err(format!("m = {m} does not increase (previous {prev})")))
            }
            _ => {}
        }
        rows.push((m, h));
    }
    if rows.is_empty() {
        return Err(Error::TableParse {
            line: 0,
            msg: "no data rows".into(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn leading_params_of_builtins() {
        assert_eq!(leading_params(&SchemeModel::heterodyne()).unwrap(), (0.125, 1.0));
        assert_eq!(leading_params(&SchemeModel::mark_ii()).unwrap(), (1.0 / 16.0, 1.5));
        assert_eq!(leading_params(&SchemeModel::mark_i()).unwrap(), (0.125, 0.5));
        assert_eq!(leading_params(&SchemeModel::canonical()).unwrap().0, 0.0);
    }

    #[test]
    fn tabulated_without_tail_has_no_leading_params() {
        let s = SchemeModel::tabulated(vec![(0, 1.0), (1, 0.09)], None).unwrap();
        assert!(matches!(leading_params(&s), Err(Error::MissingTail)));
    }

    #[test]
    fn het_exact_small_m() {
        // 1 - √π/2
        let h0 = 1.0 - std::f64::consts::PI.sqrt() / 2.0;
        assert!((h_het_exact(0) - h0).abs() < 1e-15);
        assert!((h_het_exact(0) - 0.113_773_1).abs() < 1e-7);
        assert!((h_het_exact(1) - 0.060_014_4).abs() < 1e-7);
    }

    #[test]
    fn het_series_leading_terms() {
        let m = 1_000_000u64;
        let x = (m + 1) as f64;
        let two = h_het_series(m, 2).unwrap();
        assert!((two - (1.0 / (8.0 * x) - 1.0 / (128.0 * x * x))).abs() < 1e-22);
        assert!((h_het_series(m, 12).unwrap() - 1.25e-7).abs() < 1e-12);
        assert!(h_het_series(m, 13).is_err());
        assert!(h_het_series(m, 0).is_err());
    }

    #[test]
    fn het_large_m_limit() {
        let s = SchemeModel::heterodyne();
        for m in [1_000u64, 100_000, 10_000_000] {
            let r = s.h(m) * 8.0 * (m + 1) as f64;
            assert!((r - 1.0).abs() < 1.0 / m as f64);
        }
    }

    #[test]
    fn per_scheme_values() {
        assert_eq!(SchemeModel::canonical().h(17), 0.0);
        assert_eq!(SchemeModel::mark_ii().h(4), 1.0 / 128.0);
        assert_eq!(SchemeModel::mark_ii().h(0), 1.0);
        let m1 = SchemeModel::mark_i().h(10_000);
        let expect = 1.0 / 800.0 - 0.101562e-4 - 0.0508e-6;
        assert!((m1 - expect).abs() < 1e-15);
        assert!((m1 - 0.001_239_79).abs() < 1e-8);
        // below the switch only the leading term is used
        assert_eq!(SchemeModel::mark_i().h(4), 0.125 / 2.0);
        assert_eq!(SchemeModel::mark_i().h(0), 1.0);
        assert_eq!(SchemeModel::power_law(0.3, 0.7).unwrap().h(0), 1.0);
    }

    #[test]
    fn clamping_keeps_h_in_unit_interval() {
        // the three-term mark I series is negative at m = 1
        let s = SchemeModel::mark_i().with_m_switch(1);
        assert_eq!(s.h(1), 0.0);
        let big = SchemeModel::power_law(5.0, 1.0).unwrap();
        assert_eq!(big.h(2), 1.0);
    }

    #[test]
    fn real_and_integer_evaluations_agree() {
        for s in [
            SchemeModel::heterodyne(),
            SchemeModel::mark_i(),
            SchemeModel::mark_ii(),
            SchemeModel::power_law(0.2, 1.2).unwrap(),
        ] {
            for m in [0u64, 1, 5, 11, 12, 13, 100, 54321] {
                let a = s.h(m);
                let b = s.h_real(m as f64);
                assert!((a - b).abs() <= 1e-14 * a.max(1e-300), "{s} m={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn table_lookup_and_tail() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "# header\n0,1.0\n1,0.09\n").unwrap();
        let s = load_h_table(f.path(), Some(PowerTail::new(0.125, 0.5).unwrap())).unwrap();
        assert_eq!(s.kind(), SchemeKind::Tabulated);
        assert_eq!(s.h(1), 0.09);
        assert_eq!(s.h(0), 1.0);
        assert!((s.h(4) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn table_errors_name_the_line() {
        assert!(matches!(parse_h_table(""), Err(Error::TableParse { .. })));
        match parse_h_table("0,1.0\n1,1.2\n") {
            Err(Error::TableParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_h_table("0,1.0\n2,0.5\n1,0.4\n") {
            Err(Error::TableParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_h_table("0;1.0\n") {
            Err(Error::TableParse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        assert!(parse_h_table("1,0.5\n").is_err());
    }

    #[test]
    fn table_interpolates_gaps() {
        let s = SchemeModel::tabulated(vec![(0, 1.0), (10, 0.5)], None).unwrap();
        assert!((s.h(5) - 0.75).abs() < 1e-15);
        assert_eq!(s.h(20), 0.5);
    }
}
