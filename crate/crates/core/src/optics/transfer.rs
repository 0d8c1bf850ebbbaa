//! Event-level outcome distributions for the Monte Carlo generator.
//!
//! The two idler photons (B's from input port 3, A's from input port 4) pass
//! the interference element and an analyzer per output port. The signal
//! photons (modes 1, 2) only see their own analyzers. Each table lists every
//! joint outcome with its probability so the generator can draw one per
//! candidate event.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quantum::{tensor, CMatrix, DensityOperator, Polarization, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Element {
    HalfBeamSplitter,
    /// Transmits H, reflects V.
    PolarizingBeamSplitter,
}

/// Projective analyzer in front of a detector; `None` detects every photon.
pub type Analyzer = Option<Polarization>;

/// Analyzers on modes 1 and 2 and on the element outputs 3′ and 4′.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyzerSet {
    pub mode1: Analyzer,
    pub mode2: Analyzer,
    pub out3: Analyzer,
    pub out4: Analyzer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhotonFate {
    D3,
    D4,
    Blocked,
}

/// A photon that reached a detector, with which input it came from when known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectedPhoton {
    pub fate: PhotonFate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOutcome {
    pub pass1: bool,
    pub pass2: bool,
    /// For distinguishable photons `[B idler, A idler]`; otherwise sorted.
    pub fates: [PhotonFate; 2],
    pub prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleOutcome {
    pub pass: bool,
    pub fate: PhotonFate,
    pub prob: f64,
}

#[derive(Debug, Clone)]
pub struct TransferTables {
    /// Idlers in one temporal mode.
    pub same: Vec<JointOutcome>,
    /// Idlers in orthogonal temporal modes.
    pub diff: Vec<JointOutcome>,
    /// Source A alone: analyzer on mode 1 and the fate of A's idler.
    pub single_a: Vec<SingleOutcome>,
    /// Source B alone: analyzer on mode 2 and the fate of B's idler.
    pub single_b: Vec<SingleOutcome>,
}

/// Output mode `port*2 + k`, `k = 0` along the analyzer axis, `k = 1` orthogonal.
struct Transfer {
    t: [[C64; 4]; 4],
    fate: [PhotonFate; 4],
}

fn element_matrix(element: Element) -> [[C64; 4]; 4] {
    let z = C64::from(0.0);
    let mut u = [[z; 4]; 4];
    match element {
        Element::HalfBeamSplitter => {
            let s = C64::from(FRAC_1_SQRT_2);
            for p in 0..2 {
                u[p][p] = s;
                u[2 + p][p] = s;
                u[p][2 + p] = s;
                u[2 + p][2 + p] = -s;
            }
        }
        Element::PolarizingBeamSplitter => {
            let one = C64::from(1.0);
            u[0][0] = one; // 3H → 3′H
            u[2][2] = one; // 4H → 4′H
            u[3][1] = one; // 3V → 4′V
            u[1][3] = one; // 4V → 3′V
        }
    }
    u
}

fn analyzer_rows(a: Analyzer) -> ([[C64; 2]; 2], [bool; 2]) {
    let axis = a.unwrap_or(Polarization::H);
    let rows = [axis, axis.orthogonal()].map(|p| p.amplitudes().map(|x| x.conj()));
    (rows, [true, a.is_none()])
}

fn transfer(element: Element, out3: Analyzer, out4: Analyzer) -> Transfer {
    let u = element_matrix(element);
    let mut t = [[C64::from(0.0); 4]; 4];
    let mut fate = [PhotonFate::Blocked; 4];
    for (port, analyzer) in [out3, out4].into_iter().enumerate() {
        let (rows, passes) = analyzer_rows(analyzer);
        for k in 0..2 {
            for input in 0..4 {
                t[port * 2 + k][input] =
                    rows[k][0] * u[port * 2][input] + rows[k][1] * u[port * 2 + 1][input];
            }
            if passes[k] {
                fate[port * 2 + k] = if port == 0 { PhotonFate::D3 } else { PhotonFate::D4 };
            }
        }
    }
    Transfer { t, fate }
}

/// `[pass, fail]` projectors for one signal analyzer.
fn signal_projectors(a: Analyzer) -> [CMatrix; 2] {
    match a {
        None => [CMatrix::identity(2, 2), CMatrix::zeros(2, 2)],
        Some(p) => {
            let v = p.amplitudes();
            let pass = CMatrix::from_fn(2, 2, |r, c| v[r] * v[c].conj());
            let fail = CMatrix::identity(2, 2) - &pass;
            [pass, fail]
        }
    }
}

fn sandwich(rho: &CMatrix, lead: usize, row: &CMatrix) -> CMatrix {
    let k = CMatrix::identity(lead, lead).kronecker(row);
    &k * rho * k.adjoint()
}

impl TransferTables {
    /// `rho_a` is ordered (mode 1, mode 4), `rho_b` (mode 2, mode 3).
    pub fn new(
        element: Element,
        analyzers: AnalyzerSet,
        rho_a: &DensityOperator,
        rho_b: &DensityOperator,
    ) -> Result<Self> {
        let tr = transfer(element, analyzers.out3, analyzers.out4);
        let e1 = signal_projectors(analyzers.mode1);
        let e2 = signal_projectors(analyzers.mode2);
        let e12: Vec<(bool, bool, CMatrix)> = [(true, 0), (false, 1)]
            .iter()
            .flat_map(|&(p1, i)| {
                [(true, 0), (false, 1)]
                    .iter()
                    .map(|&(p2, j)| (p1, p2, e1[i].kronecker(&e2[j])))
                    .collect::<Vec<_>>()
            })
            .collect();
        let total = tensor(rho_a, rho_b).permute_qubits(&[0, 2, 3, 1])?;
        let total = total.matrix();
        let z = C64::from(0.0);

        let joint = |amp: &dyn Fn(usize, usize) -> C64, fates: [PhotonFate; 2], out: &mut Vec<JointOutcome>| {
            let mut row = CMatrix::zeros(1, 4);
            for x3 in 0..2 {
                for x4 in 0..2 {
                    row[(0, x3 * 2 + x4)] = amp(x3, x4);
                }
            }
            if row.iter().all(|a| a.norm_sqr() == 0.0) {
                return;
            }
            let sigma = sandwich(total, 4, &row);
            for (p1, p2, e) in &e12 {
                let prob = (e * &sigma).trace().re;
                push_joint(out, JointOutcome { pass1: *p1, pass2: *p2, fates, prob });
            }
        };

        let t = &tr.t;
        let mut same = Vec::new();
        for m in 0..4 {
            for n in m..4 {
                let amp = move |x3: usize, x4: usize| {
                    if m == n {
                        C64::from(2f64.sqrt()) * t[m][x3] * t[m][2 + x4]
                    } else {
                        t[m][x3] * t[n][2 + x4] + t[n][x3] * t[m][2 + x4]
                    }
                };
                let mut fates = [tr.fate[m], tr.fate[n]];
                fates.sort();
                joint(&amp, fates, &mut same);
            }
        }
        let mut diff = Vec::new();
        for m in 0..4 {
            for n in 0..4 {
                let amp = move |x3: usize, x4: usize| t[m][x3] * t[n][2 + x4];
                joint(&amp, [tr.fate[m], tr.fate[n]], &mut diff);
            }
        }

        let single = |rho: &DensityOperator, input_port: usize, e: &[CMatrix; 2]| {
            let mut out: Vec<SingleOutcome> = Vec::new();
            for m in 0..4 {
                let mut row = CMatrix::zeros(1, 2);
                for x in 0..2 {
                    row[(0, x)] = t[m][input_port * 2 + x];
                }
                if row.iter().all(|a| *a == z) {
                    continue;
                }
                let sigma = sandwich(rho.matrix(), 2, &row);
                for (pass, proj) in [(true, &e[0]), (false, &e[1])] {
                    let prob = (proj * &sigma).trace().re;
                    let fate = tr.fate[m];
                    match out.iter_mut().find(|o| o.pass == pass && o.fate == fate) {
                        Some(o) => o.prob += prob,
                        None => out.push(SingleOutcome { pass, fate, prob }),
                    }
                }
            }
            out.retain(|o| o.prob > 1e-15);
            out
        };
        let single_a = single(rho_a, 1, &e1);
        let single_b = single(rho_b, 0, &e2);

        same.retain(|o| o.prob > 1e-15);
        diff.retain(|o| o.prob > 1e-15);
        Ok(Self { same, diff, single_a, single_b })
    }
}

fn push_joint(out: &mut Vec<JointOutcome>, o: JointOutcome) {
    match out
        .iter_mut()
        .find(|x| x.pass1 == o.pass1 && x.pass2 == o.pass2 && x.fates == o.fates)
    {
        Some(x) => x.prob += o.prob,
        None => out.push(o),
    }
}
