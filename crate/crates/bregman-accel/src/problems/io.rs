//! Instance files: a self-describing JSON header next to a raw binary
//! payload of little-endian 64-bit floats, so instances round-trip
//! bit-exactly.
//!
//! The header lists payload sections in order; offsets are implicit.
//! Completion sample positions are stored as exactly-representable linear
//! indices `i * n + j` in the float payload.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{DenseMatrix, RNG_ALGORITHM};
use crate::problems::{
    BasisPursuitProblem, BpGenMeta, MatrixCompletionProblem, MatrixKind, McGenMeta,
    ProblemInstance, SignalKind,
};

const BP_FORMAT: &str = "bp-instance";
const MC_FORMAT: &str = "mc-instance";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Section {
    name: String,
    count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    bp: Option<BpHeaderMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc: Option<McHeaderMeta>,
    rng: String,
    mu_default: f64,
    payload: String,
    sections: Vec<Section>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BpHeaderMeta {
    n: usize,
    m: usize,
    s: usize,
    matrix_kind: MatrixKind,
    signal_kind: SignalKind,
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct McHeaderMeta {
    n: usize,
    r: usize,
    p: usize,
    fr: f64,
    sr: f64,
    seed: u64,
}

/// Writes `bytes` to `path` through a temp file in the same directory, so
/// concurrent readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn f64s_to_le_bytes(out: &mut Vec<u8>, values: &[f64]) {
    out.reserve(values.len() * 8);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Writes `<dir>/<name>.json` and `<dir>/<name>.bin`; returns both paths.
pub fn save_instance(
    problem: &ProblemInstance,
    dir: &Path,
    name: &str,
) -> Result<(PathBuf, PathBuf), Error> {
    fs::create_dir_all(dir)?;
    let json_path = dir.join(format!("{name}.json"));
    let bin_path = dir.join(format!("{name}.bin"));
    let payload_name = format!("{name}.bin");

    let mut payload: Vec<u8> = Vec::new();
    let header = match problem {
        ProblemInstance::Bp(p) => {
            let meta = p.gen_meta.ok_or_else(|| {
                Error::invalid("cannot save an instance without generation metadata")
            })?;
            let mut sections = vec![
                Section {
                    name: "a".into(),
                    count: p.m() * p.n(),
                },
                Section {
                    name: "b".into(),
                    count: p.m(),
                },
            ];
            f64s_to_le_bytes(&mut payload, p.a.data());
            f64s_to_le_bytes(&mut payload, &p.b);
            if let Some(x) = &p.x_true {
                sections.push(Section {
                    name: "x_true".into(),
                    count: p.n(),
                });
                f64s_to_le_bytes(&mut payload, x);
            }
            Header {
                format: BP_FORMAT.into(),
                version: FORMAT_VERSION,
                bp: Some(BpHeaderMeta {
                    n: meta.n,
                    m: meta.m,
                    s: meta.s,
                    matrix_kind: meta.matrix_kind,
                    signal_kind: meta.signal_kind,
                    seed: meta.seed,
                }),
                mc: None,
                rng: RNG_ALGORITHM.into(),
                mu_default: 5.0,
                payload: payload_name,
                sections,
            }
        }
        ProblemInstance::Mc(p) => {
            let meta = p.gen_meta.ok_or_else(|| {
                Error::invalid("cannot save an instance without generation metadata")
            })?;
            let omega_linear: Vec<f64> = p
                .omega
                .iter()
                .map(|&(i, j)| (i * p.n + j) as f64)
                .collect();
            let mut sections = vec![
                Section {
                    name: "omega_linear".into(),
                    count: p.p(),
                },
                Section {
                    name: "observed".into(),
                    count: p.p(),
                },
            ];
            f64s_to_le_bytes(&mut payload, &omega_linear);
            f64s_to_le_bytes(&mut payload, &p.observed);
            if let Some(m) = &p.m_true {
                sections.push(Section {
                    name: "m_true".into(),
                    count: p.n * p.n,
                });
                f64s_to_le_bytes(&mut payload, m.data());
            }
            Header {
                format: MC_FORMAT.into(),
                version: FORMAT_VERSION,
                bp: None,
                mc: Some(McHeaderMeta {
                    n: meta.n,
                    r: meta.r,
                    p: meta.p,
                    fr: meta.fr,
                    sr: meta.sr,
                    seed: meta.seed,
                }),
                rng: RNG_ALGORITHM.into(),
                mu_default: 5.0 * p.n as f64,
                payload: payload_name,
                sections,
            }
        }
    };

    let mut header_bytes = serde_json::to_vec_pretty(&header)?;
    header_bytes.push(b'\n');
    write_atomic(&bin_path, &payload)?;
    write_atomic(&json_path, &header_bytes)?;
    Ok((json_path, bin_path))
}

fn read_section<'a>(
    path: &Path,
    floats: &'a [f64],
    sections: &[Section],
    name: &str,
) -> Result<Option<&'a [f64]>, Error> {
    let mut offset = 0usize;
    for s in sections {
        if s.name == name {
            if offset + s.count > floats.len() {
                return Err(Error::format(
                    path.display().to_string(),
                    format!("section {name} exceeds payload length"),
                ));
            }
            return Ok(Some(&floats[offset..offset + s.count]));
        }
        offset += s.count;
    }
    Ok(None)
}

fn require<'a>(
    path: &Path,
    floats: &'a [f64],
    sections: &[Section],
    name: &str,
) -> Result<&'a [f64], Error> {
    read_section(path, floats, sections, name)?.ok_or_else(|| {
        Error::format(
            path.display().to_string(),
            format!("missing required section {name}"),
        )
    })
}

/// Loads an instance saved by [`save_instance`], validating its invariants.
/// Also returns the header's default smoothing weight.
pub fn load_instance(json_path: &Path) -> Result<(ProblemInstance, f64), Error> {
    let header_bytes = fs::read(json_path)?;
    let header: Header = serde_json::from_slice(&header_bytes)?;
    if header.version != FORMAT_VERSION {
        return Err(Error::format(
            json_path.display().to_string(),
            format!("unsupported version {}", header.version),
        ));
    }
    let dir = json_path.parent().unwrap_or_else(|| Path::new("."));
    let bin_path = dir.join(&header.payload);
    let raw = fs::read(&bin_path)?;
    if raw.len() % 8 != 0 {
        return Err(Error::format(
            bin_path.display().to_string(),
            "payload length is not a multiple of 8",
        ));
    }
    let total: usize = header.sections.iter().map(|s| s.count).sum();
    if raw.len() / 8 != total {
        return Err(Error::format(
            bin_path.display().to_string(),
            format!("payload holds {} values, header declares {}", raw.len() / 8, total),
        ));
    }
    let floats: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();

    let instance = match header.format.as_str() {
        BP_FORMAT => {
            let meta = header.bp.ok_or_else(|| {
                Error::format(json_path.display().to_string(), "missing bp metadata")
            })?;
            let a_data = require(&bin_path, &floats, &header.sections, "a")?;
            let b = require(&bin_path, &floats, &header.sections, "b")?;
            if a_data.len() != meta.m * meta.n || b.len() != meta.m {
                return Err(Error::format(
                    bin_path.display().to_string(),
                    "section sizes do not match declared dimensions",
                ));
            }
            let x_true = read_section(&bin_path, &floats, &header.sections, "x_true")?
                .map(|s| s.to_vec());
            let a = DenseMatrix::from_vec(meta.m, meta.n, a_data.to_vec());
            let mut p = BasisPursuitProblem::new(a, b.to_vec(), x_true);
            p.gen_meta = Some(BpGenMeta {
                matrix_kind: meta.matrix_kind,
                signal_kind: meta.signal_kind,
                n: meta.n,
                m: meta.m,
                s: meta.s,
                seed: meta.seed,
            });
            ProblemInstance::Bp(p)
        }
        MC_FORMAT => {
            let meta = header.mc.ok_or_else(|| {
                Error::format(json_path.display().to_string(), "missing mc metadata")
            })?;
            let linear = require(&bin_path, &floats, &header.sections, "omega_linear")?;
            let observed = require(&bin_path, &floats, &header.sections, "observed")?;
            let omega: Vec<(usize, usize)> = linear
                .iter()
                .map(|&l| {
                    let l = l as usize;
                    (l / meta.n, l % meta.n)
                })
                .collect();
            let m_true = read_section(&bin_path, &floats, &header.sections, "m_true")?
                .map(|s| DenseMatrix::from_vec(meta.n, meta.n, s.to_vec()));
            let mut p = MatrixCompletionProblem::new(
                meta.n,
                meta.r,
                omega,
                observed.to_vec(),
                m_true,
            );
            p.gen_meta = Some(McGenMeta {
                n: meta.n,
                r: meta.r,
                p: meta.p,
                fr: meta.fr,
                sr: meta.sr,
                seed: meta.seed,
            });
            ProblemInstance::Mc(p)
        }
        other => {
            return Err(Error::format(
                json_path.display().to_string(),
                format!("unknown format {other}"),
            ))
        }
    };
    instance.validate()?;
    Ok((instance, header.mu_default))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_bp, gen_mc};

    #[test]
    fn bp_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = gen_bp(MatrixKind::Gaussian, SignalKind::Uniform, 40, 16, 3, 12).unwrap();
        let inst = ProblemInstance::Bp(p.clone());
        save_instance(&inst, dir.path(), "case").unwrap();
        let (loaded, mu) = load_instance(&dir.path().join("case.json")).unwrap();
        assert_eq!(mu, 5.0);
        match loaded {
            ProblemInstance::Bp(q) => {
                assert_eq!(q.a.data(), p.a.data());
                assert_eq!(q.b, p.b);
                assert_eq!(q.x_true, p.x_true);
                let meta = q.gen_meta.unwrap();
                assert_eq!(meta.seed, 12);
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn mc_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = gen_mc(25, 3, 0.4, 4).unwrap();
        let inst = ProblemInstance::Mc(p.clone());
        save_instance(&inst, dir.path(), "case").unwrap();
        let (loaded, mu) = load_instance(&dir.path().join("case.json")).unwrap();
        assert_eq!(mu, 125.0);
        match loaded {
            ProblemInstance::Mc(q) => {
                assert_eq!(q.omega, p.omega);
                assert_eq!(q.observed, p.observed);
                assert_eq!(
                    q.m_true.as_ref().unwrap().data(),
                    p.m_true.as_ref().unwrap().data()
                );
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn save_twice_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = gen_bp(MatrixKind::BernoulliPm1, SignalKind::Gaussian, 30, 12, 2, 8).unwrap();
        let inst = ProblemInstance::Bp(p);
        save_instance(&inst, dir.path(), "one").unwrap();
        save_instance(&inst, dir.path(), "two").unwrap();
        let j1 = std::fs::read(dir.path().join("one.json")).unwrap();
        let j2 = std::fs::read(dir.path().join("two.json")).unwrap();
        // Headers differ only in the payload file name.
        let s1 = String::from_utf8(j1).unwrap().replace("one.bin", "X.bin");
        let s2 = String::from_utf8(j2).unwrap().replace("two.bin", "X.bin");
        assert_eq!(s1, s2);
        let b1 = std::fs::read(dir.path().join("one.bin")).unwrap();
        let b2 = std::fs::read(dir.path().join("two.bin")).unwrap();
        assert_eq!(b1, b2);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = gen_bp(MatrixKind::Gaussian, SignalKind::Gaussian, 20, 8, 2, 0).unwrap();
        save_instance(&ProblemInstance::Bp(p), dir.path(), "case").unwrap();
        let bin = dir.path().join("case.bin");
        let bytes = std::fs::read(&bin).unwrap();
        std::fs::write(&bin, &bytes[..bytes.len() - 8]).unwrap();
        assert!(load_instance(&dir.path().join("case.json")).is_err());
    }
}
