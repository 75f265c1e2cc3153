//! Manual diagnostics for the synthetic corpus; run with
//! `cargo test -p speed-core --test calibrate -- --ignored --nocapture`.

mod common;

use speed_core::pipeline::{evaluate_with_config, PipelineConfig, Stage};

#[test]
#[ignore]
fn corpus_score_table() {
    let corpus = common::satellite_corpus(5000, 100, 128);
    let mut base = PipelineConfig::default();
    if let Ok(t) = std::env::var("CAL_THRESH") {
        let (lo, hi) = t.split_once(',').unwrap();
        base.canny = speed_core::canny::CannyParams::fixed(lo.parse().unwrap(), hi.parse().unwrap());
    }

    let configs = [
        ("raw canny", base.raw_canny()),
        ("full", base.clone()),
        ("no FHH", base.without_stage(Stage::FuzzyHyperbolization)),
        ("no AD", base.without_stage(Stage::AnisotropicDiffusion)),
        ("no CN", base.without_stage(Stage::ContrastNormalization)),
        ("no CB", base.without_stage(Stage::ConditionalBlur)),
        ("no MB", base.without_stage(Stage::MedianBlur)),
        ("CN forced", {
            let mut cfg = base.clone();
            cfg.forced_stages.insert(Stage::ContrastNormalization);
            cfg
        }),
        ("CB forced", {
            let mut cfg = base.clone();
            cfg.forced_stages.insert(Stage::ConditionalBlur);
            cfg
        }),
    ];
    for (name, cfg) in &configs {
        let score = evaluate_with_config(&corpus, cfg).unwrap();
        println!("{name:12}  tp {:.3}  fp {:.3}", score.tp, score.fp);
    }

    // trigger rates on the default pipeline
    let mut cn_fired = 0;
    let mut cb_fired = 0;
    for item in &corpus {
        let (_, trace) = speed_core::pipeline::run_pipeline(&item.image, &base).unwrap();
        if trace.stage(Stage::ContrastNormalization).unwrap().applied {
            cn_fired += 1;
        }
        if trace.stage(Stage::ConditionalBlur).unwrap().applied {
            cb_fired += 1;
        }
    }
    println!("CN fired {cn_fired}/{} CB fired {cb_fired}/{}", corpus.len(), corpus.len());
}

#[test]
#[ignore]
fn faint_object_diagnostics() {
    use speed_core::canny::{canny_detect, sobel_magnitude, CannyParams};
    use speed_core::eval::{matching_map, rasterize_ground_truth, ssim_map, tp_score};
    use speed_core::filters::*;
    use speed_core::raster::to_grayscale;

    let params = if let Ok(t) = std::env::var("CAL_THRESH") {
        let (lo, hi) = t.split_once(',').unwrap();
        CannyParams::fixed(lo.parse().unwrap(), hi.parse().unwrap())
    } else {
        CannyParams::default()
    };

    for seed in [2000u64, 2001, 2002, 2003] {
        let synth = common::synth_image(seed, 128);
        let (wb, _) = white_balance(&synth.item.image);
        let gray = to_grayscale(&wb);
        let ad = anisotropic_diffusion(&gray, &DiffusionParams::default()).unwrap();
        let cn = conditional_contrast_normalization(&ad, &ConditionalTriggerParams::default(), false).image;
        let fhh = fuzzy_histogram_hyperbolization(&cn, 256);

        let faint_anns: Vec<_> = synth.annotations.iter().filter(|a| a.difficult).cloned().collect();
        let strong_anns: Vec<_> = synth.annotations.iter().filter(|a| !a.difficult).cloned().collect();
        let g_faint = rasterize_ground_truth(&faint_anns, 128, 128).unwrap();
        let g_strong = rasterize_ground_truth(&strong_anns, 128, 128).unwrap();

        for (label, pre) in [("noFHH", &cn), ("FHH", &fhh)] {
            let mb = median_blur(pre);
            let gb = gaussian_blur(&mb);
            let cb = conditional_gaussian_blur(&gb, &ConditionalTriggerParams::default(), false).image;
            let mags = sobel_magnitude(&cb);
            let edges = canny_detect(&cb, &params).unwrap();

            // gradient magnitude stats restricted to faint ground-truth pixels
            let mut at_faint: Vec<f64> = Vec::new();
            for y in 0..128usize {
                for x in 0..128usize {
                    if g_faint.get(x, y) == 1 {
                        at_faint.push(mags[y * 128 + x]);
                    }
                }
            }
            at_faint.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let fq = |f: f64| at_faint[(f * (at_faint.len() - 1) as f64) as usize];

            // fraction of faint truth pixels with a detected edge within 1 px
            let mut hit = 0usize;
            for y in 0..128usize {
                for x in 0..128usize {
                    if g_faint.get(x, y) != 1 {
                        continue;
                    }
                    let mut near = false;
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                            if (0..128).contains(&nx) && (0..128).contains(&ny)
                                && edges.get(nx as usize, ny as usize) == 1
                            {
                                near = true;
                            }
                        }
                    }
                    if near {
                        hit += 1;
                    }
                }
            }

            let m = matching_map(&ssim_map(&synth.item.truth, &edges).unwrap());
            let tp_f = tp_score(&m, &g_faint).unwrap_or(f64::NAN);
            let tp_s = tp_score(&m, &g_strong).unwrap_or(f64::NAN);
            println!(
                "seed {seed} {label:6} faintmag q25 {:.4} q50 {:.4} q75 {:.4} hit {:.2} edges {:5} tp_faint {tp_f:.3} tp_strong {tp_s:.3}",
                fq(0.25), fq(0.5), fq(0.75),
                hit as f64 / at_faint.len() as f64,
                edges.count_ones()
            );
        }
    }
}
