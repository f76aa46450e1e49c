//! Published optimal action values of the default inventory instance
//! (`M = 2, c = 5, h = 2, p = 9`, demand pmf `(0.2, 0.3, 0.5)`, `sigma = 0.3`,
//! `gamma = 0.9`), printed to two decimals.

use std::fmt::Write;

use qh_core::QTable;

pub const REFERENCE_Q_QH: [[f64; 3]; 3] = [
    [9.31, 11.38, 10.55],
    [16.38, 15.55, 10.55],
    [20.55, 15.55, 10.55],
];

pub const REFERENCE_Q_EXP: [[f64; 3]; 3] = [
    [31.05, 33.75, 34.50],
    [38.75, 39.50, 34.50],
    [44.50, 39.50, 34.50],
];

pub const REFERENCE_MU_STAR: [usize; 3] = [1, 0, 0];
pub const REFERENCE_PI_STAR: [usize; 3] = [2, 1, 0];

/// Allowed deviation from a two-decimal printed value. The extra `1e-9`
/// absorbs floating-point error for cells that sit exactly 0.01 away.
pub const CELL_TOLERANCE: f64 = 0.01 + 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub table: &'static str,
    pub state: usize,
    pub action: usize,
    pub computed: f64,
    pub reference: f64,
}

impl Cell {
    pub fn deviation(&self) -> f64 {
        (self.computed - self.reference).abs()
    }

    pub fn ok(&self) -> bool {
        self.deviation() <= CELL_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub cells: Vec<Cell>,
}

impl Comparison {
    pub fn new(q_qh: &QTable, q_exp: &QTable) -> Self {
        let mut cells = Vec::with_capacity(18);
        for (table, computed, reference) in [
            ("Q_qh", q_qh, &REFERENCE_Q_QH),
            ("Q_exp", q_exp, &REFERENCE_Q_EXP),
        ] {
            for (s, row) in reference.iter().enumerate() {
                for (a, &r) in row.iter().enumerate() {
                    cells.push(Cell {
                        table,
                        state: s,
                        action: a,
                        computed: computed.get(s, a),
                        reference: r,
                    });
                }
            }
        }
        Self { cells }
    }

    pub fn all_ok(&self) -> bool {
        self.cells.iter().all(Cell::ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.ok())
    }

    /// Side-by-side table; cells off by more than 0.01 are marked `!`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "       Q_qh (computed / reference)                 | Q_exp (computed / reference)").unwrap();
        writeln!(out, "  s  | a=0             a=1             a=2             | a=0             a=1             a=2").unwrap();
        for s in 0..3 {
            write!(out, "  {s}  |").unwrap();
            for table in ["Q_qh", "Q_exp"] {
                for a in 0..3 {
                    let c = self
                        .cells
                        .iter()
                        .find(|c| c.table == table && c.state == s && c.action == a)
                        .expect("18 cells");
                    let mark = if c.ok() { ' ' } else { '!' };
                    write!(out, " {:>6.3}/{:<6.2}{mark} ", c.computed, c.reference).unwrap();
                }
                if table == "Q_qh" {
                    write!(out, "|").unwrap();
                }
            }
            writeln!(out).unwrap();
        }
        let bad = self.failures().count();
        writeln!(out, "{} of 18 cells within 0.01 of the reference", 18 - bad).unwrap();
        out
    }
}
