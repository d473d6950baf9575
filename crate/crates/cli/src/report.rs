//! CSV and SVG output for training runs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use fedcent::flsim::RoundRecord;

pub const CSV_HEADER: &str =
    "round,accuracy,loss,rad_cov,nonfaulty_diameter,approx_ratio,elapsed_ms";

/// Recorded in every CSV so runs are self-describing.
pub const DECISIONS: &[&str] = &[
    "lr_schedule=lr/(1+decay*round),decay=lr/rounds",
    "fedavg_combine=mean",
    "sign_flip_target=transmitted_vector",
    "fedsgd_gradient=full_shard",
    "partition_extreme=class_aligned_chunks",
];

pub fn csv_row(r: &RoundRecord) -> String {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "na".into());
    format!(
        "{},{},{},{},{},{},{:.3}",
        r.round,
        r.accuracy,
        r.loss,
        opt(r.rad_cov.map(|x| x.to_string())),
        r.nonfaulty_diameter,
        opt(r.ratio.map(|x| x.to_string())),
        r.elapsed_ms
    )
}

/// Writes the metadata comment block and header, then one flushed row per
/// round so a failed run leaves every completed round on disk.
pub struct CsvSink<W: Write> {
    out: W,
}

impl CsvSink<BufWriter<File>> {
    pub fn create(path: &Path, metadata: &[String]) -> io::Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        CsvSink::new(BufWriter::new(File::create(path)?), metadata)
    }
}

impl<W: Write> CsvSink<W> {
    pub fn new(mut out: W, metadata: &[String]) -> io::Result<Self> {
        for line in metadata {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "{CSV_HEADER}")?;
        out.flush()?;
        Ok(Self { out })
    }

    pub fn write(&mut self, r: &RoundRecord) -> io::Result<()> {
        writeln!(self.out, "{}", csv_row(r))?;
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Drops the comment lines and the last column, leaving what must be
/// identical between two runs with the same config.
pub fn deterministic_part(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Accuracy and covering radius against round, each on its own vertical
/// scale, as a standalone SVG document.
pub fn svg_chart(records: &[RoundRecord], title: &str) -> String {
    let (w, h, pad) = (720.0, 360.0, 48.0);
    let rounds = records.last().map_or(1, |r| r.round).max(1) as f64;
    let rad: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| {
            r.rad_cov
                .filter(|x| x.is_finite())
                .map(|x| (r.round as f64, x))
        })
        .collect();
    let rad_max = rad.iter().map(|p| p.1).fold(0.0, f64::max);
    let x = |round: f64| pad + (w - 2.0 * pad) * round / rounds;
    let y = |v: f64, top: f64| h - pad - (h - 2.0 * pad) * if top > 0.0 { v / top } else { 0.0 };
    let line = |pts: Vec<(f64, f64)>, colour: &str| {
        let coords: Vec<String> = pts.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
        format!(
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            coords.join(" ")
        )
    };
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{pad}\" y=\"20\">{}</text>\n\
         <line x1=\"{pad}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{r}\" y=\"{lb}\" text-anchor=\"end\">round {rounds}</text>\n\
         <text x=\"8\" y=\"{pad}\" fill=\"#1f77b4\">acc 1.0</text>\n\
         <text x=\"{r}\" y=\"{pad}\" text-anchor=\"end\" fill=\"#d62728\">rad_cov {rad_max:.3e}</text>\n",
        escape(title),
        b = h - pad,
        r = w - pad,
        lb = h - pad + 20.0,
    );
    s += &line(
        records
            .iter()
            .map(|r| (x(r.round as f64), y(r.accuracy, 1.0)))
            .collect(),
        "#1f77b4",
    );
    s += &line(
        rad.iter().map(|&(a, b)| (x(a), y(b, rad_max))).collect(),
        "#d62728",
    );
    s += "</svg>\n";
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
