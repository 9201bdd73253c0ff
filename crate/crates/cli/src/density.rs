//! Parsing of density description strings.
//!
//! Grammar: `family` or `family:key=value,key=value`. Families:
//!
//! - `uniform`: the flat density on the cube. No keys.
//! - `trig`: `1 + a·Π_t sin(2π·k·y_t)` style wave. Keys: `a` (amplitude,
//!   |a| < 1, default 0.5), `k` (frequency, default 1).
//! - `arch`: mixture of arch bumps `1 − cos(2π·k·y)` products. Key `w`:
//!   `+`-separated `weight@frequency` components, e.g. `w=0.6@1+0.4@3`.
//!   Weights must sum to one.
//!
//! Dimension comes from the surrounding `--dim` flag, not the string.

use anyhow::{bail, Context, Result};
use plif::holder::{DensityKind, HolderSpec, SyntheticDensity};

pub fn parse_density(s: &str, dim: usize) -> Result<DensityKind> {
    let (family, args) = match s.split_once(':') {
        Some((f, a)) => (f.trim(), a.trim()),
        None => (s.trim(), ""),
    };
    let pairs: Vec<(&str, &str)> = args
        .split(',')
        .filter(|kv| !kv.trim().is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .with_context(|| format!("expected key=value, got {kv:?}"))
        })
        .collect::<Result<_>>()?;

    match family {
        "uniform" => {
            if let Some((k, _)) = pairs.first() {
                bail!("uniform takes no parameters, got {k:?}");
            }
            Ok(DensityKind::TrigWave {
                dim,
                amplitude: 0.0,
                frequency: 1,
            })
        }
        "trig" => {
            let mut amplitude = 0.5;
            let mut frequency = 1u32;
            for (k, v) in pairs {
                match k {
                    "a" => amplitude = v.parse().with_context(|| format!("amplitude {v:?}"))?,
                    "k" => frequency = v.parse().with_context(|| format!("frequency {v:?}"))?,
                    other => bail!("trig has keys a, k; got {other:?}"),
                }
            }
            Ok(DensityKind::TrigWave {
                dim,
                amplitude,
                frequency,
            })
        }
        "arch" => {
            let mut components = vec![(1.0, 1u32)];
            for (k, v) in pairs {
                match k {
                    "w" => {
                        components = v
                            .split('+')
                            .map(|part| {
                                let (w, f) = part
                                    .split_once('@')
                                    .with_context(|| format!("expected weight@freq, got {part:?}"))?;
                                Ok((
                                    w.trim().parse().with_context(|| format!("weight {w:?}"))?,
                                    f.trim().parse().with_context(|| format!("freq {f:?}"))?,
                                ))
                            })
                            .collect::<Result<_>>()?;
                    }
                    other => bail!("arch has key w; got {other:?}"),
                }
            }
            Ok(DensityKind::ArchMixture { dim, components })
        }
        other => bail!("unknown density family {other:?} (uniform, trig, arch)"),
    }
}

/// Parse and certify in one step. The class scale must cover the family's
/// certified constant; construction fails otherwise.
pub fn build_density(s: &str, beta: f64, l: f64, dim: usize) -> Result<SyntheticDensity> {
    let kind = parse_density(s, dim)?;
    let spec = HolderSpec::new(beta, l, dim)?;
    Ok(SyntheticDensity::new(kind, spec)?)
}
