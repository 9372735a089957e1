//! `estimate`: write the estimated transmission maps and ambient light as
//! images (`<id>_t.png`, `<id>_a.png`) without enhancing anything.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};

use crate::io::{ambient_swatch, load_image, save_image, tmap_to_image};
use crate::manifest::load_or_ingest;
use crate::methods::{estimate_one, Method, MethodCtx};

pub const SWATCH_SIZE: usize = 64;

pub struct EstimateArgs {
    pub data: PathBuf,
    pub out: PathBuf,
    pub method: Method,
}

/// Returns the number of per-image failures.
pub fn run_estimate(args: &EstimateArgs, ctx: &mut MethodCtx) -> Result<usize> {
    if !args.method.estimates_parameters() {
        bail!(
            "method {} does not estimate (t, A); use dcp, udcp, or pauienet",
            args.method.name()
        );
    }
    if args.method == Method::Pauienet && ctx.net.is_none() {
        bail!("method pauienet requires --checkpoint");
    }
    let manifest = load_or_ingest(&args.data)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let mut failures = 0;
    for entry in &manifest.entries {
        let result = load_image(&manifest.resolve(&entry.degraded))
            .and_then(|img| estimate_one(ctx, args.method, &img))
            .and_then(|(t, a)| {
                save_image(&args.out.join(format!("{}_t.png", entry.id)), &tmap_to_image(&t))?;
                save_image(
                    &args.out.join(format!("{}_a.png", entry.id)),
                    &ambient_swatch(&a, SWATCH_SIZE),
                )
            });
        if let Err(e) = result {
            eprintln!("{}: {e:#}", entry.id);
            failures += 1;
        }
    }
    Ok(failures)
}
