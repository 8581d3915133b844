//! Generates one compressed-sensing instance and one matrix-completion
//! instance, writes both to disk, and loads them back.
//!
//! Instance files come in pairs: `<name>.json` holds the header (dimensions,
//! generator settings, default smoothing weight) and `<name>.bin` holds the
//! numeric payload as little-endian f64. Identical generator arguments always
//! produce byte-identical files.

use bregman_accel::problems::{
    self, gen_bp, gen_mc, load_instance, save_instance, MatrixKind, ProblemInstance, SignalKind,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;

    let bp = gen_bp(MatrixKind::Gaussian, SignalKind::Uniform, 400, 160, 32, 7)?;
    let (bp_json, bp_bin) = save_instance(&ProblemInstance::Bp(bp), dir.path(), "cs-demo")?;
    println!("wrote {} and {}", bp_json.display(), bp_bin.display());

    let mc = gen_mc(60, 4, 0.25, 7)?;
    println!(
        "completion instance: n={} rank={} observed={} of {} entries",
        60,
        4,
        mc.p(),
        60 * 60
    );
    let (mc_json, _) = save_instance(&ProblemInstance::Mc(mc), dir.path(), "mc-demo")?;

    // Round trip: the loader recovers the full instance plus its default mu.
    let (instance, mu_default) = load_instance(&bp_json)?;
    match &instance {
        ProblemInstance::Bp(p) => {
            println!(
                "reloaded cs instance: m={} n={} |b|={:.6} default mu={}",
                p.m(),
                p.n(),
                p.b_norm(),
                mu_default
            );
            p.validate()?;
        }
        ProblemInstance::Mc(_) => unreachable!("saved a basis pursuit instance"),
    }

    let (instance, mu_default) = load_instance(&mc_json)?;
    instance.validate()?;
    println!(
        "reloaded mc instance validates; default mu={mu_default} (5n), rng={}",
        problems::rng_algorithm()
    );
    Ok(())
}
