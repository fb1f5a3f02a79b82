use proptest::prelude::*;

use oscone::boxes::{chsh_value, local_membership, CorrelationBox, LocalModel};
use oscone::numerics::format_sig;
use oscone::opsys::{gamma_quotient, nc2_pairing, v_from_functional, LInfVec, VVec};

fn weights() -> impl Strategy<Value = [f64; 16]> {
    prop::array::uniform16(0.0f64..1.0).prop_filter("nonzero mass", |w| w.iter().sum::<f64>() > 1e-3).prop_map(|w| {
        let total: f64 = w.iter().sum();
        w.map(|v| v / total)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn format_sig_keeps_twelve_digits(x in -1e9f64..1e9) {
        let back: f64 = format_sig(x, 12).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-12 * x.abs().max(1e-300));
    }

    #[test]
    fn gamma_is_linear_with_the_kernel(x in prop::array::uniform4(-5.0f64..5.0), s in -5.0f64..5.0) {
        let base = gamma_quotient(&LInfVec::new(x.to_vec())).unwrap().as_scalar().unwrap();
        let shifted = [x[0] + s, x[1] + s, x[2] - s, x[3] - s];
        let moved = gamma_quotient(&LInfVec::new(shifted.to_vec())).unwrap().as_scalar().unwrap();
        for (a, b) in base.iter().zip(&moved) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn pairing_is_linear(v in prop::array::uniform3(0.0f64..3.0), c in prop::array::uniform3(-2.0f64..2.0), t in -3.0f64..3.0) {
        let vv = VVec::from_free(v[0], v[1], v[2]);
        prop_assert_eq!(v_from_functional(vv.entries()).unwrap(), vv);
        let scaled = nc2_pairing(&vv, c.map(|x| x * t));
        prop_assert!((scaled - t * nc2_pairing(&vv, c)).abs() <= 1e-10);
    }

    #[test]
    fn local_mixtures_are_local(w in weights()) {
        let b = LocalModel::new(w).unwrap().to_box();
        prop_assert!(chsh_value(&b).abs() <= 2.0 + 1e-12);
        prop_assert!(local_membership(&b, 1e-9).is_local());
        let back = CorrelationBox::from_matrix(b.to_matrix().entries()).unwrap();
        let pairs = back.table().iter().flatten().flatten().flatten().zip(b.table().iter().flatten().flatten().flatten());
        for (x, y) in pairs {
            prop_assert!((x - y).abs() <= 1e-15);
        }
    }
}
