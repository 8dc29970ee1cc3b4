//! Text rendering for terminal output and plot scripts.

use std::fmt::Write as _;

use hhllab_core::linalg::ComplexVector;
use hhllab_core::noise::{SweepMode, SweepResult};
use hhllab_core::{format_number, HhlProblem, StateVector};

/// Amplitudes above this magnitude are listed.
const SHOW_TOL: f64 = 1e-12;

/// Rounding noise below [`SHOW_TOL`] is printed as zero.
fn shown(x: f64) -> String {
    format_number(if x.abs() <= SHOW_TOL { 0.0 } else { x })
}

/// Nonzero amplitudes of `s`, one row per basis state, split into the
/// `b`, clock and ancilla registers (each most significant bit first).
pub fn amplitude_table(p: &HhlProblem, s: &StateVector) -> String {
    let n = p.n_clock;
    let nb = p.num_b_qubits();
    let mut out = format!(
        "  {:>nb$} {:>n$} a  {:>20} {:>20} {:>20}\n",
        "b", "c", "re", "im", "prob"
    );
    for (i, z) in s.amplitudes().iter().enumerate() {
        if z.norm() <= SHOW_TOL {
            continue;
        }
        let anc = i & 1;
        let clock = (i >> 1) & ((1 << n) - 1);
        let b = i >> (1 + n);
        let _ = writeln!(
            out,
            "  {b:0nb$b} {clock:0n$b} {anc}  {:>20} {:>20} {:>20}",
            shown(z.re),
            shown(z.im),
            format_number(z.norm_sqr())
        );
    }
    out
}

pub fn vector_line(v: &ComplexVector) -> String {
    let parts: Vec<String> = v
        .iter()
        .map(|z| {
            if z.im.abs() <= SHOW_TOL {
                shown(z.re)
            } else {
                let sign = if z.im < 0.0 { '-' } else { '+' };
                format!("{}{sign}{}i", shown(z.re), shown(z.im.abs()))
            }
        })
        .collect();
    format!("({})", parts.join(", "))
}

/// Gnuplot script plotting every ancilla-1 column against `p_2q`, one line
/// per mode, with the ideal values dashed.
pub fn gnuplot_script(sweep: &SweepResult, csv_name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set xlabel 'two-qubit depolarizing rate p_2q'");
    let _ = writeln!(out, "set ylabel 'probability'");
    let _ = writeln!(out, "set key outside right");
    let _ = writeln!(out, "set terminal pngcairo size 900,560");
    let _ = writeln!(out, "set output 'sweep.png'");
    let mut series = Vec::new();
    for (i, label) in sweep.labels.iter().enumerate() {
        if !label.ends_with('1') {
            continue;
        }
        let col = i + 3;
        for mode in [SweepMode::TwoQOnly, SweepMode::Full] {
            if sweep.rows_for(mode).next().is_none() {
                continue;
            }
            series.push(format!(
                "'{csv_name}' every ::1 using 1:(strcol(2) eq '{m}' ? ${col} : 1/0) with linespoints title 'P_{label} {m}'",
                m = mode.label()
            ));
        }
        series.push(format!(
            "{} with lines dashtype 2 title 'P_{label} ideal'",
            format_number(sweep.ideal[i])
        ));
    }
    let _ = writeln!(out, "plot {}", series.join(", \\\n     "));
    out
}
