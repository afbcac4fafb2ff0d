//! Distribution files: a `# capacity=<nats> nu=<value> certified=<bool>`
//! header followed by one `x<TAB>p` line per mass point.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{CapacityResult, DiscreteInput};

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFile {
    pub capacity: f64,
    pub nu: f64,
    pub certified: bool,
    pub input: DiscreteInput,
}

impl DistributionFile {
    pub fn from_result(res: &CapacityResult) -> Self {
        Self { capacity: res.capacity, nu: res.kkt.nu, certified: res.kkt.certified, input: res.input.clone() }
    }
}

pub fn render_distribution(d: &DistributionFile) -> String {
    let mut out = format!("# capacity={} nu={} certified={}\n", d.capacity, d.nu, d.certified);
    for (x, p) in d.input.iter() {
        out.push_str(&format!("{x}\t{p}\n"));
    }
    out
}

pub fn parse_distribution(text: &str) -> Result<DistributionFile> {
    let bad = |m: String| Error::InvalidInput(format!("distribution file: {m}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| bad("missing '# capacity=... nu=... certified=...' header".into()))?;
    let (mut capacity, mut nu, mut certified) = (None, None, None);
    for field in body.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| bad(format!("malformed header field '{field}'")))?;
        match k {
            "capacity" => capacity = Some(v.parse::<f64>().map_err(|e| bad(format!("capacity: {e}")))?),
            "nu" => nu = Some(v.parse::<f64>().map_err(|e| bad(format!("nu: {e}")))?),
            "certified" => certified = Some(v.parse::<bool>().map_err(|e| bad(format!("certified: {e}")))?),
            _ => return Err(bad(format!("unknown header field '{k}'"))),
        }
    }
    let mut pairs = Vec::new();
    for (n, line) in lines.enumerate() {
        let mut it = line.split('\t');
        let (Some(x), Some(p), None) = (it.next(), it.next(), it.next()) else {
            return Err(bad(format!("line {}: expected 'x<TAB>p'", n + 2)));
        };
        let x = x.trim().parse::<f64>().map_err(|e| bad(format!("line {}: {e}", n + 2)))?;
        let p = p.trim().parse::<f64>().map_err(|e| bad(format!("line {}: {e}", n + 2)))?;
        pairs.push((x, p));
    }
    let (points, probs) = pairs.into_iter().unzip();
    Ok(DistributionFile {
        capacity: capacity.ok_or_else(|| bad("header lacks capacity".into()))?,
        nu: nu.ok_or_else(|| bad("header lacks nu".into()))?,
        certified: certified.ok_or_else(|| bad("header lacks certified".into()))?,
        input: DiscreteInput::new(points, probs)?,
    })
}

pub fn write_distribution(path: &Path, d: &DistributionFile) -> Result<()> {
    fs::write(path, render_distribution(d)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_distribution(path: &Path) -> Result<DistributionFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_distribution(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let d = DistributionFile {
            capacity: 0.123456789012345,
            nu: 0.1,
            certified: true,
            input: DiscreteInput::new(vec![-1.5, 0.0, 2.0 / 3.0], vec![0.25, 0.5, 0.25]).unwrap(),
        };
        let text = render_distribution(&d);
        assert!(text.starts_with("# capacity=0.123456789012345 nu=0.1 certified=true\n"));
        assert_eq!(parse_distribution(&text).unwrap(), d);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_distribution("").is_err());
        assert!(parse_distribution("capacity=1\n0\t1\n").is_err());
        assert!(parse_distribution("# capacity=1 nu=0 certified=true\n0 1\n").is_err());
    }
}
