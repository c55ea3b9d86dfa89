use delcodec_core::codec::EncodedImage;
use delcodec_core::entropy1d::shannon_entropy;
use delcodec_core::formats::{read_pgm, write_pgm};
use delcodec_core::renderer::{read_dden, render, write_dden};
use delcodec_core::{
    compute_gradient, decode, deldensity, delentropy, encode, BitDepth, EdgeMode, ImageGrid, KernelSpec,
    RenderConfig, RenderMethod,
};
use proptest::prelude::*;

fn image_strategy(max_dim: usize, max_value: u16) -> impl Strategy<Value = ImageGrid> {
    (2..=max_dim, 2..=max_dim).prop_flat_map(move |(w, h)| {
        prop::collection::vec(0..=max_value, w * h)
            .prop_map(move |px| ImageGrid::new(w, h, BitDepth::Eight, px).unwrap())
    })
}

fn even_image(max_half: usize, depth: BitDepth) -> impl Strategy<Value = ImageGrid> {
    let top = depth.max_value() as u16;
    (1..=max_half, 1..=max_half, 0..=top).prop_flat_map(move |(hw, hh, level)| {
        let (w, h) = (2 * hw, 2 * hh);
        prop::collection::vec(0..=level, w * h).prop_map(move |px| ImageGrid::new(w, h, depth, px).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_entropy_is_subadditive(img in image_strategy(24, 255)) {
        for kernel in [KernelSpec::A, KernelSpec::C] {
            let r = delentropy(&img, &kernel, EdgeMode::Valid, false).unwrap();
            prop_assert!(r.joint <= r.h_fx + r.h_fy + 1e-9);
            prop_assert!(r.joint >= r.h_fx.max(r.h_fy) - 1e-9);
        }
    }

    #[test]
    fn half_turn_preserves_delentropy(img in image_strategy(24, 255)) {
        let turned = img.rotate_180();
        for (kernel, edge) in [(KernelSpec::A, EdgeMode::Valid), (KernelSpec::C, EdgeMode::Valid)] {
            let a = delentropy(&img, &kernel, edge, true).unwrap();
            let b = delentropy(&turned, &kernel, edge, true).unwrap();
            prop_assert!((a.delentropy - b.delentropy).abs() < 1e-9);
        }
    }

    #[test]
    fn histogram_total_matches_sites(img in image_strategy(24, 255)) {
        let g = compute_gradient(&img, &KernelSpec::A, EdgeMode::Valid).unwrap();
        let dd = deldensity(&g);
        prop_assert_eq!(dd.total() as usize, (img.width() - 1) * (img.height() - 1));
        let h = shannon_entropy(&dd).unwrap();
        prop_assert!(h >= 0.0 && h <= (dd.total() as f64).log2() + 1e-9);
    }

    #[test]
    fn codec_roundtrip_8bit(img in even_image(12, BitDepth::Eight)) {
        let (enc, stats) = encode(&img).unwrap();
        prop_assert!(stats.max_pre_rounding_error < 0.5);
        let parsed = EncodedImage::parse(&enc.serialize().unwrap()).unwrap();
        prop_assert_eq!(decode(&parsed).unwrap(), img);
    }

    #[test]
    fn codec_roundtrip_16bit(img in even_image(8, BitDepth::Sixteen)) {
        let (enc, _) = encode(&img).unwrap();
        let parsed = EncodedImage::parse(&enc.serialize().unwrap()).unwrap();
        prop_assert_eq!(decode(&parsed).unwrap(), img);
    }

    #[test]
    fn payload_rate_within_one_bit(img in even_image(12, BitDepth::Eight)) {
        let (_, s) = encode(&img).unwrap();
        let bps = s.bits_per_symbol();
        prop_assert!(bps >= s.pair_entropy - 1e-9, "{} < {}", bps, s.pair_entropy);
        prop_assert!(bps < s.pair_entropy + 1.0 || (s.distinct_symbols == 1 && bps == 0.0));
    }

    #[test]
    fn pgm_roundtrip(img in image_strategy(16, 255)) {
        prop_assert_eq!(read_pgm(&write_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn pgm_parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let _ = read_pgm(&bytes);
        let mut framed = b"P5 3 2 255\n".to_vec();
        framed.extend_from_slice(&bytes);
        let _ = read_pgm(&framed);
    }

    #[test]
    fn container_parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..96)) {
        let _ = EncodedImage::parse(&bytes);
    }

    #[test]
    fn render_mass_is_one(img in image_strategy(16, 255), method in 0usize..3) {
        let method = [RenderMethod::BinNearest, RenderMethod::BinBilinear, RenderMethod::Fourier][method];
        let g = compute_gradient(&img, &KernelSpec::A, EdgeMode::Valid).unwrap();
        let cfg = RenderConfig::auto(&g, 32, method);
        let d = render(&g, &cfg).unwrap();
        prop_assert!((d.mass() - 1.0).abs() < 1e-6);
        let back = read_dden(&write_dden(&d)).unwrap();
        prop_assert_eq!(back.size, d.size);
        prop_assert!((back.mass() - 1.0).abs() < 1e-4);
    }
}
