//! CSV writers for harness results. Every file has a header row and a fixed
//! column order; floats use the shortest round-trip representation so reruns
//! are byte-identical. Wall-clock times go to a separate file.

use std::io::Write;

use crate::error::Result;

use super::outage::OutageEstimate;
use super::sweep::{PointResult, Trace};
use super::validation::{GoldenCheck, SoundnessCase};

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

fn max_users(points: &[PointResult]) -> usize {
    points.iter().filter_map(|p| p.estimate.as_ref()).map(|e| e.p_out.len()).max().unwrap_or(0)
}

/// One row per (grid point, scheme).
pub fn write_sweep<W: Write>(w: W, points: &[PointResult]) -> Result<()> {
    let k = max_users(points);
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["grid", "scheme", "weighted", "weighted_stderr"].map(String::from).to_vec();
    for u in 0..k {
        header.push(format!("p_out_{u}"));
        header.push(format!("p_out_{u}_stderr"));
    }
    header.extend(["iterations", "certified", "drops", "trials", "error"].map(String::from));
    out.write_record(&header)?;
    for p in points {
        let mut row = vec![num(p.grid), p.scheme.name().to_string()];
        match &p.estimate {
            Some(e) => {
                row.push(num(e.weighted));
                row.push(num(e.weighted_stderr));
                for u in 0..k {
                    row.push(e.p_out.get(u).map(|x| num(*x)).unwrap_or_default());
                    row.push(e.p_out_stderr.get(u).map(|x| num(*x)).unwrap_or_default());
                }
            }
            None => row.extend(std::iter::repeat_n(String::new(), 2 + 2 * k)),
        }
        row.push(num(p.iterations));
        row.push(num(p.certified));
        row.push(p.drops.to_string());
        row.push(p.estimate.as_ref().map(|e| e.trials.to_string()).unwrap_or_default());
        row.push(p.error.clone().unwrap_or_default());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Long format `(grid, scheme, user, metric, value, stderr, seed)`; `user`
/// is empty for aggregate metrics.
pub struct MetricsWriter<W: Write> {
    out: csv::Writer<W>,
    seed: u64,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(w: W, seed: u64) -> Result<Self> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["grid", "scheme", "user", "metric", "value", "stderr", "seed"])?;
        Ok(MetricsWriter { out, seed })
    }

    pub fn record(&mut self, grid: f64, scheme: &str, user: Option<usize>, metric: &str, value: f64, stderr: Option<f64>) -> Result<()> {
        self.out.write_record([
            num(grid),
            scheme.to_string(),
            user.map(|u| u.to_string()).unwrap_or_default(),
            metric.to_string(),
            num(value),
            stderr.map(num).unwrap_or_default(),
            self.seed.to_string(),
        ])?;
        Ok(())
    }

    pub fn estimate(&mut self, grid: f64, scheme: &str, e: &OutageEstimate) -> Result<()> {
        self.record(grid, scheme, None, "weighted", e.weighted, Some(e.weighted_stderr))?;
        self.record(grid, scheme, None, "trials", e.trials as f64, None)?;
        for u in 0..e.p_out.len() {
            self.record(grid, scheme, Some(u), "p_out", e.p_out[u], Some(e.p_out_stderr[u]))?;
            self.record(grid, scheme, Some(u), "secrecy", e.secrecy[u], Some(e.secrecy_stderr[u]))?;
            self.record(grid, scheme, Some(u), "qos", e.qos[u], Some(e.qos_stderr[u]))?;
        }
        Ok(())
    }

    pub fn point(&mut self, p: &PointResult) -> Result<()> {
        let s = p.scheme.name();
        if let Some(e) = &p.estimate {
            self.estimate(p.grid, s, e)?;
        }
        self.record(p.grid, s, None, "iterations", p.iterations, None)?;
        self.record(p.grid, s, None, "certified", p.certified, None)
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn write_metrics<W: Write>(w: W, points: &[PointResult], seed: u64) -> Result<()> {
    let mut m = MetricsWriter::new(w, seed)?;
    for p in points {
        m.point(p)?;
    }
    m.finish()
}

/// Wall-clock seconds per (grid point, scheme), summed over drops.
pub fn write_timing<W: Write>(w: W, points: &[PointResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["grid", "scheme", "wall_time_s"])?;
    for p in points {
        out.write_record([num(p.grid), p.scheme.name().to_string(), format!("{:.6}", p.wall_time.as_secs_f64())])?;
    }
    out.flush()?;
    Ok(())
}

/// Iterate histories of a convergence experiment; iteration 0 is the
/// initial point.
pub fn write_traces<W: Write>(w: W, traces: &[Trace]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scheme", "drop", "iteration", "cost", "thresholds", "bf", "ris", "uav", "temperature", "eps_scale"])?;
    for t in traces {
        let s = t.scheme.name();
        out.write_record([s, &t.drop.to_string(), "0", &num(t.initial_cost), "", "", "", "", "", ""])?;
        for r in &t.history {
            out.write_record([
                s.to_string(),
                t.drop.to_string(),
                r.iteration.to_string(),
                num(r.cost),
                r.thresholds.name().into(),
                r.bf.name().into(),
                r.ris.name().into(),
                r.uav.name().into(),
                num(r.temperature),
                num(r.eps_scale),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_soundness<W: Write>(w: W, cases: &[SoundnessCase]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "n", "epsilon", "tau", "margin", "violation", "stderr", "pass"])?;
    for c in cases {
        out.write_record([
            c.index.to_string(),
            c.n.to_string(),
            num(c.epsilon),
            num(c.tau),
            num(c.margin),
            num(c.violation),
            num(c.stderr),
            c.pass.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_goldens<W: Write>(w: W, checks: &[GoldenCheck]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["kind", "fc_ghz", "distance_m", "percentile", "elevation_deg", "expected_db", "computed_db", "pass"])?;
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    for c in checks {
        out.write_record([
            c.kind.clone(),
            num(c.fc_ghz),
            opt(c.distance_m),
            opt(c.percentile),
            opt(c.elevation_deg),
            num(c.expected_db),
            format!("{:.4}", c.computed_db),
            c.pass.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Scheme;
    use std::time::Duration;

    fn point(grid: f64, scheme: Scheme, users: usize, error: Option<&str>) -> PointResult {
        let estimate = (users > 0).then(|| OutageEstimate {
            trials: 10,
            p_out: vec![0.5; users],
            p_out_stderr: vec![0.1; users],
            secrecy: vec![0.2; users],
            secrecy_stderr: vec![0.1; users],
            qos: vec![0.4; users],
            qos_stderr: vec![0.1; users],
            weighted: 0.5,
            weighted_stderr: 0.05,
        });
        PointResult { grid, scheme, estimate, iterations: 3.0, certified: 0.5, drops: 1, error: error.map(String::from), wall_time: Duration::from_millis(5) }
    }

    #[test]
    fn sweep_rows_and_quoting() {
        let pts = [point(0.0, Scheme::Proposed, 2, None), point(0.0, Scheme::RandomPhase, 0, Some("drop 0: bad, \"x\""))];
        let mut buf = Vec::new();
        write_sweep(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("grid,scheme,weighted,weighted_stderr,p_out_0,p_out_0_stderr,p_out_1"));
        assert!(lines[2].ends_with("\"drop 0: bad, \"\"x\"\"\""));
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let n = rdr.headers().unwrap().len();
        assert!(rdr.records().all(|r| r.unwrap().len() == n));
    }

    #[test]
    fn metrics_long_format() {
        let mut buf = Vec::new();
        write_metrics(&mut buf, &[point(10.0, Scheme::AoLs, 1, None)], 7).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("grid,scheme,user,metric,value,stderr,seed"));
        assert_eq!(lines.next(), Some("10,ao-ls,,weighted,0.5,0.05,7"));
        assert!(text.contains("10,ao-ls,0,p_out,0.5,0.1,7"));
    }
}
