use nladpcm::codec::{Adaptation, EncodedStream, PredictorKind};
use nladpcm::lpc::{autocorrelation, levinson_durbin_full, lpc_predict, LinearCoeffs};
use nladpcm::mlp::{
    lm_train, multistart_train, random_candidate, sse, MultistartConfig, Topology, TrainConfig,
};
use nladpcm::quantizer::{dequantize, quantize, Code, QuantizerConfig};
use nladpcm::signal_io::{load_pcm, mean_std, segsnr_slices, store_pcm, PcmFormat};
use nladpcm::{encode, CodecConfig, MlpWeights, SampleBuffer, TrainingSet};
use proptest::prelude::*;

fn unit_samples(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..=1.0, 1..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pcm_round_trip_within_one_lsb(samples in unit_samples(500), wav in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let (path, fmt) = if wav {
            (dir.path().join("x.wav"), PcmFormat::Wav)
        } else {
            (dir.path().join("x.raw"), PcmFormat::Raw16Le)
        };
        store_pcm(&SampleBuffer::new(samples.clone(), 8000), &path, fmt).unwrap();
        let back = load_pcm(&path, fmt).unwrap();
        prop_assert_eq!(back.len(), samples.len());
        for (a, b) in samples.iter().zip(&back.samples) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0, "{} vs {}", a, b);
        }
    }

    #[test]
    fn segsnr_scale_covariant(
        x in prop::collection::vec(0.05f64..0.9, 200..400),
        noise in prop::collection::vec(-0.01f64..0.01, 400),
        c in prop_oneof![-20.0f64..-0.05, 0.05f64..20.0],
    ) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(a, n)| a + n).collect();
        let base = segsnr_slices(&x, &y, 50).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v * c).collect();
        let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
        let scaled = segsnr_slices(&xs, &ys, 50).unwrap();
        for (a, b) in base.per_segment_db.iter().zip(&scaled.per_segment_db) {
            if *a > -10.0 && *a < 80.0 {
                prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn segsnr_mean_std_ignore_segment_order(
        x in prop::collection::vec(-0.9f64..0.9, 400),
        noise in prop::collection::vec(-0.05f64..0.05, 400),
        rotate in 0usize..8,
    ) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(a, n)| a + n).collect();
        let base = segsnr_slices(&x, &y, 50).unwrap();
        let mut xs: Vec<&[f64]> = x.chunks(50).collect();
        let mut ys: Vec<&[f64]> = y.chunks(50).collect();
        xs.rotate_left(rotate);
        ys.rotate_left(rotate);
        xs.swap(0, 7);
        ys.swap(0, 7);
        let rx: Vec<f64> = xs.concat();
        let ry: Vec<f64> = ys.concat();
        let moved = segsnr_slices(&rx, &ry, 50).unwrap();
        prop_assert!((base.segsnr_db - moved.segsnr_db).abs() < 1e-9);
        prop_assert!((base.std_db - moved.std_db).abs() < 1e-9);
        let (m, s) = mean_std(&moved.per_segment_db);
        prop_assert!((m - moved.segsnr_db).abs() < 1e-12 && (s - moved.std_db).abs() < 1e-12);
    }

    #[test]
    fn levinson_error_energy_non_increasing(x in prop::collection::vec(-1.0f64..1.0, 60..300), order in 1usize..26) {
        let r = autocorrelation(&x, order).unwrap();
        let sol = levinson_durbin_full(&r, order).unwrap();
        for w in sol.error_energy.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", sol.error_energy);
        }
    }

    #[test]
    fn lpc_predict_is_linear(
        a in prop::collection::vec(-2.0f64..2.0, 1..26),
        h in prop::collection::vec(-1.0f64..1.0, 26),
        alpha in -10.0f64..10.0,
    ) {
        let coeffs = LinearCoeffs::new(a).unwrap();
        let scaled: Vec<f64> = h.iter().map(|v| alpha * v).collect();
        let p = lpc_predict(&h, &coeffs).unwrap();
        let ps = lpc_predict(&scaled, &coeffs).unwrap();
        prop_assert!((ps - alpha * p).abs() <= 1e-12 * (1.0 + ps.abs()));
    }

    #[test]
    fn quantizer_decoder_tracks_encoder(
        bits in 2u8..=5,
        residuals in prop::collection::vec(-2.0f64..2.0, 1..2000),
        scale_exp in -5.0f64..0.0,
    ) {
        let cfg = QuantizerConfig::jayant(bits).unwrap();
        let scale = 10f64.powf(scale_exp);
        let half = f64::from(cfg.half_levels());
        let (mut enc, mut dec) = (cfg.initial_state(), cfg.initial_state());
        for e in residuals.iter().map(|r| r * scale) {
            let delta = enc.delta;
            let (code, e_hat, next) = quantize(e, enc, &cfg);
            prop_assert!(code.in_range(bits));
            let (d_hat, dnext) = dequantize(code, dec, &cfg).unwrap();
            prop_assert_eq!(d_hat.to_bits(), e_hat.to_bits());
            prop_assert_eq!(dnext.delta.to_bits(), next.delta.to_bits());
            prop_assert!(next.delta >= cfg.delta_min && next.delta <= cfg.delta_max);
            if e >= -half * delta && e < half * delta {
                prop_assert!((e - e_hat).abs() <= delta / 2.0 * (1.0 + 1e-12));
            }
            enc = next;
            dec = dnext;
        }
    }

    #[test]
    fn code_offset_binary_round_trip(bits in 2u8..=5, raw in 0u32..32) {
        let v = raw % (1 << bits);
        let code = Code::from_unsigned(v, bits);
        prop_assert!(code.in_range(bits));
        prop_assert_eq!(code.to_unsigned(bits), v);
    }

    #[test]
    fn weights_snapshot_round_trip(seed in any::<u64>(), range in 0.0f64..5.0) {
        let w = random_candidate(Topology::default(), range, seed, 0);
        let back = MlpWeights::from_snapshot(Topology::default(), &w.to_snapshot()).unwrap();
        for (a, b) in w.flat().iter().zip(back.flat()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        let flat = MlpWeights::from_flat(Topology::default(), w.flat().to_vec()).unwrap();
        prop_assert_eq!(flat, w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lm_train_never_increases_sse(
        series in prop::collection::vec(-1.0f64..1.0, 30..120),
        seed in any::<u64>(),
        range in 0.01f64..2.0,
        epochs in 0usize..10,
    ) {
        let data = TrainingSet::from_window(&series, 10).unwrap();
        let init = random_candidate(Topology::default(), range, seed, 0);
        let (w, reported) = lm_train(&init, &data, &TrainConfig::default().with_epochs(epochs)).unwrap();
        prop_assert!(sse(&w, &data) <= sse(&init, &data));
        prop_assert_eq!(reported.to_bits(), sse(&w, &data).to_bits());
    }

    #[test]
    fn multistart_subset_and_selection(
        series in prop::collection::vec(-1.0f64..1.0, 40..110),
        seed in any::<u64>(),
        k in 1usize..4,
        with_prev in any::<bool>(),
    ) {
        let data = TrainingSet::from_window(&series, 10).unwrap();
        let prev = random_candidate(Topology::default(), 0.5, seed ^ 1, 99);
        let prev = with_prev.then_some(&prev);
        let small = MultistartConfig { n_random: k, ..MultistartConfig::default() };
        let large = MultistartConfig { n_random: k + 1, ..MultistartConfig::default() };
        let a = multistart_train(prev, &data, &data, &small, seed).unwrap();
        let b = multistart_train(prev, &data, &data, &large, seed).unwrap();
        prop_assert!(b.score <= a.score);

        // Winner's score is no worse than any single candidate trained alone.
        for i in 0..=k {
            let init = random_candidate(Topology::default(), large.init_range, seed, i);
            let (w, _) = lm_train(&init, &data, &large.train.with_epochs(large.epochs_random)).unwrap();
            prop_assert!(b.score <= sse(&w, &data));
        }
        if let Some(p) = prev {
            let (w, _) = lm_train(p, &data, &large.train.with_epochs(large.epochs_prev)).unwrap();
            prop_assert!(b.score <= sse(&w, &data));
        }
    }

    #[test]
    fn stream_bytes_round_trip(
        predictor in prop_oneof![Just(PredictorKind::Lpc), Just(PredictorKind::Mlp), Just(PredictorKind::Hybrid)],
        forward in any::<bool>(),
        bits in 2u8..=5,
        frame_len in 20usize..120,
        samples in prop::collection::vec(-0.9f64..0.9, 50..400),
    ) {
        let adaptation = if forward && predictor != PredictorKind::Hybrid {
            Adaptation::Forward
        } else {
            Adaptation::Backward
        };
        let mut cfg = CodecConfig::block(predictor, adaptation, bits, frame_len).unwrap();
        cfg.mlp.multistart.n_random = 1;
        let (stream, _) = encode(&SampleBuffer::new(samples, 8000), &cfg).unwrap();
        let bytes = stream.to_bytes().unwrap();
        let back = EncodedStream::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes().unwrap(), bytes);
        prop_assert_eq!(&back.codes, &stream.codes);
        prop_assert_eq!(&back.hybrid_bits, &stream.hybrid_bits);
        prop_assert_eq!(back.side_info_bits(), stream.expected_hybrid_bits());
        prop_assert_eq!(back.forward_payload.len(), stream.expected_payload_blocks());
    }
}
