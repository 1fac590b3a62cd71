//! Gnuplot scripts for each output, optionally overlaid with reference tables.

use std::fmt::Write as _;

pub const QCDSTREAM_REFERENCE: &str = include_str!("../../../data/reference/qcdstream_2ghz_xeon.csv");
pub const MEMORY_REFERENCE: &str = include_str!("../../../data/reference/memory_bandwidth.csv");
pub const PCI_REFERENCE: &str = include_str!("../../../data/reference/pci_performance.csv");

const REF_NOTE: &str = "2001-2003 hardware";

#[derive(Clone, Debug, PartialEq)]
pub enum PlotSpec {
    Qcdstream { kernels: Vec<&'static str> },
    Stream,
    Smp,
    /// Layout labels and `(L, working set bytes)` tick positions.
    Inverter { layouts: Vec<String>, ticks: Vec<(usize, u64)> },
    Latency,
    Scaling { ls: Vec<usize> },
    Substitute,
}

impl PlotSpec {
    /// Bundled table this figure can be compared against.
    pub fn reference(&self) -> Option<&'static str> {
        match self {
            PlotSpec::Qcdstream { .. } => Some(QCDSTREAM_REFERENCE),
            PlotSpec::Stream => Some(MEMORY_REFERENCE),
            PlotSpec::Substitute => Some(PCI_REFERENCE),
            _ => None,
        }
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Script body; `csv` and `reference` are paths relative to the script.
pub fn script(spec: &PlotSpec, csv: &str, title: &str, reference: Option<&str>) -> String {
    let mut s = String::new();
    let d = quote(csv);
    let _ = writeln!(s, "# gnuplot script for {csv}");
    let _ = writeln!(s, "set datafile separator \",\"");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output {}", quote(&format!("{csv}.png")));
    let _ = writeln!(s, "set title {}", quote(title));
    let _ = writeln!(s, "set grid");
    let _ = writeln!(s, "set key outside right");
    let r = reference.map(quote);
    match spec {
        PlotSpec::Qcdstream { kernels } => {
            let _ = writeln!(s, "pidx(p) = p eq \"InCache\" ? 0 : p eq \"Sequential\" ? 1 : p eq \"Strided\" ? 2 : 3");
            let _ = writeln!(s, "set xtics (\"InCache\" 0, \"Sequential\" 1, \"Strided\" 2, \"Mapped\" 3)");
            let _ = writeln!(s, "set xrange [-0.5:3.5]");
            let _ = writeln!(s, "set ylabel \"MFlop/s\"");
            let mut parts: Vec<String> = kernels
                .iter()
                .map(|k| format!("{d} skip 2 using (pidx(strcol(3))):(strcol(2) eq \"{k}\" ? $9 : NaN) with linespoints title \"{k}\""))
                .collect();
            if let Some(r) = &r {
                let _ = writeln!(s, "set y2label \"reference MFlop/s ({REF_NOTE})\"\nset y2tics");
                parts.push(format!("{r} skip 2 using 0:2 axes x1y2 with points pt 6 title \"MatVec, 2.0 GHz Xeon ({REF_NOTE})\""));
                parts.push(format!("{r} skip 2 using 0:3 axes x1y2 with points pt 8 title \"MatMat, 2.0 GHz Xeon ({REF_NOTE})\""));
            }
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
        PlotSpec::Stream => {
            let _ = writeln!(s, "set ylabel \"copy MB/s\"\nset style fill solid 0.5\nset boxwidth 0.8\nset xtics rotate by -30");
            let mut parts = vec![format!("{d} skip 2 using (-1):10:xtic(\"this host\") with boxes title \"this host\"")];
            if let Some(r) = &r {
                parts.push(format!("{r} skip 2 using 0:4:xtic(3) with boxes title \"stream copy ({REF_NOTE})\""));
            }
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
        PlotSpec::Smp => {
            let _ = writeln!(s, "set ylabel \"MFlop/s\"\nset y2label \"efficiency\"\nset y2tics\nset style fill solid 0.5");
            let _ = writeln!(
                s,
                "plot {d} skip 2 using 0:(strcol(1) eq \"Copy\" ? $9 : $8):xtic(5) with boxes title \"rate\", \\\n     {d} skip 2 using 0:11 axes x1y2 with linespoints title \"efficiency\""
            );
        }
        PlotSpec::Inverter { layouts, ticks } => {
            let _ = writeln!(s, "set logscale x\nset xlabel \"working set (bytes); tick labels are L\"\nset ylabel \"MFlop/s\"");
            let t: Vec<String> = ticks.iter().map(|(l, ws)| format!("\"{l}\" {ws}")).collect();
            if !t.is_empty() {
                let _ = writeln!(s, "set xtics ({})", t.join(", "));
            }
            let parts: Vec<String> = layouts
                .iter()
                .map(|lay| format!("{d} skip 2 using (strcol(2) eq {} ? $10 : NaN):9 with linespoints title {}", quote(lay), quote(lay)))
                .collect();
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
        PlotSpec::Latency => {
            let _ = writeln!(s, "set xlabel \"injected first-packet delay (us)\"\nset ylabel \"MFlop/s per node\"");
            let _ = writeln!(
                s,
                "plot {d} skip 2 using 1:7 with linespoints title \"D-slash\", \\\n     {d} skip 2 using 1:8 with linespoints title \"CONGRAD\""
            );
        }
        PlotSpec::Scaling { ls } => {
            let _ = writeln!(s, "set logscale x 2\nset xlabel \"processes\"\nset ylabel \"MFlop/s per node\"");
            let parts: Vec<String> = ls
                .iter()
                .map(|l| format!("{d} skip 2 using (column(2) == {l} ? $1 : NaN):8 with linespoints title \"L={l}\""))
                .collect();
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
        PlotSpec::Substitute => {
            if r.is_some() {
                let _ = writeln!(s, "set multiplot layout 2,1");
            }
            let _ = writeln!(s, "set ylabel \"cluster MFlop/s\"\nset style fill solid 0.5\nset boxwidth 0.8\nset xtics rotate by -30");
            let _ = writeln!(
                s,
                "plot {d} skip 2 using 0:7:xtic(1) with boxes title \"one node substituted\", \\\n     {d} skip 2 using 0:8 with linespoints title \"homogeneous base\""
            );
            if let Some(r) = &r {
                let _ = writeln!(s, "set title \"PCI burst rates ({REF_NOTE})\"\nset ylabel \"MB/s\"");
                let _ = writeln!(
                    s,
                    "plot {r} skip 2 using ($0-0.2):3:xtic(2) with boxes title \"read\", \\\n     {r} skip 2 using ($0+0.2):4 with boxes title \"write\""
                );
                let _ = writeln!(s, "unset multiplot");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_tables_have_comment_and_header_lines() {
        for t in [QCDSTREAM_REFERENCE, MEMORY_REFERENCE, PCI_REFERENCE] {
            let mut lines = t.lines();
            assert!(lines.next().unwrap().starts_with("# "));
            assert!(lines.next().unwrap().contains(','));
        }
    }

    #[test]
    fn compare_adds_labelled_series() {
        let spec = PlotSpec::Qcdstream { kernels: vec!["MatVec"] };
        let plain = script(&spec, "q.csv", "t", None);
        let cmp = script(&spec, "q.csv", "t", Some("q.csv.reference.csv"));
        assert!(!plain.contains(REF_NOTE));
        assert!(cmp.contains("q.csv.reference.csv") && cmp.contains(REF_NOTE));
    }

    #[test]
    fn inverter_ticks_are_labelled_by_size() {
        let spec = PlotSpec::Inverter { layouts: vec!["field-major".into()], ticks: vec![(2, 1152), (4, 18432)] };
        let s = script(&spec, "inv.csv", "t", None);
        assert!(s.contains("set xtics (\"2\" 1152, \"4\" 18432)"));
        assert!(s.contains("strcol(2) eq \"field-major\""));
    }
}
