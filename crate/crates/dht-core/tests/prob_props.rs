use dht_core::prob::*;
use proptest::prelude::*;

fn prob01() -> impl Strategy<Value = f64> {
    (0.0f64..=1.0).prop_map(|x| (x * 1e9).round() / 1e9)
}

fn dist(n: usize) -> impl Strategy<Value = Dist> {
    proptest::collection::vec(0.01f64..1.0, n).prop_map(move |w| {
        let s: f64 = w.iter().sum();
        Dist::new(Alphabet::indexed(n), w.iter().map(|x| x / s).collect()).unwrap()
    })
}

fn channel(ni: usize, no: usize) -> impl Strategy<Value = Channel> {
    proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, no), ni).prop_map(
        move |rows| {
            let rows = rows
                .into_iter()
                .map(|r| {
                    let s: f64 = r.iter().sum();
                    r.iter().map(|x| x / s).collect()
                })
                .collect();
            Channel::new(Alphabet::indexed(ni), Alphabet::indexed(no), rows).unwrap()
        },
    )
}

/// Full joint of the Markov chain U − V − X − Y.
fn chain_joint(px: &Dist, y_given_x: &Channel, v_given_x: &Channel, u_given_v: &Channel) -> Joint {
    compose(px, Role::X, y_given_x, Role::Y)
        .unwrap()
        .extend(Role::X, v_given_x, Role::V)
        .unwrap()
        .extend(Role::V, u_given_v, Role::U)
        .unwrap()
}

proptest! {
    #[test]
    fn kl_nonnegative_and_zero_iff_equal(p in dist(4), q in dist(4)) {
        let d = p.kl_to(&q).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!(p.kl_to(&p).unwrap() == 0.0);
        let max_gap = p.mass().iter().zip(q.mass()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if d < 1e-12 {
            prop_assert!(max_gap < 1e-4);
        }
    }

    #[test]
    fn mi_equals_entropy_identity(px in dist(3), c in channel(3, 4)) {
        let j = compose(&px, Role::X, &c, Role::Y).unwrap();
        let lhs = j.mutual_information();
        let rhs = px.entropy() + j.marginal(Role::Y).unwrap().entropy() - j.entropy();
        prop_assert!((lhs - rhs).abs() < 1e-10);
        prop_assert!(lhs >= -1e-12);
    }

    #[test]
    fn convolve_monotone_on_lower_half(a in 0.0f64..=0.5, b1 in 0.0f64..=0.5, b2 in 0.0f64..=0.5) {
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        prop_assert!(binary_convolve(a, lo) <= binary_convolve(a, hi) + 1e-15);
    }

    // Chain identity: I(U;X) + I(V;X|UY) = I(U;Y) + I(V;X) − I(V;Y)
    // for any joint built from a Markov chain U − V − X − Y.
    #[test]
    fn chain_rate_identity(
        px in dist(2),
        yx in channel(2, 2),
        vx in channel(2, 2),
        uv in channel(2, 2),
    ) {
        let j = chain_joint(&px, &yx, &vx, &uv);
        let iux = j.marginalize(&[Role::U, Role::X]).unwrap().mutual_information();
        let iuy = j.marginalize(&[Role::U, Role::Y]).unwrap().mutual_information();
        let ivx = j.marginalize(&[Role::V, Role::X]).unwrap().mutual_information();
        let ivy = j.marginalize(&[Role::V, Role::Y]).unwrap().mutual_information();
        let cmi = j.conditional_mutual_information(Role::V, Role::X, &[Role::U, Role::Y]).unwrap();
        prop_assert!(((iux + cmi) - (iuy + ivx - ivy)).abs() < 1e-9);
    }

    // Entropy-power-style bound: for uniform binary X, any U|X, and Y = X
    // through BSC(p): H(Y|U) ≥ H₂(H₂⁻¹(H(X|U)) ⋆ p).
    #[test]
    fn binary_conditional_entropy_bound(ux in channel(2, 3), p in 0.0f64..=0.5) {
        let px = Dist::uniform(Alphabet::binary());
        let j = compose(&px, Role::X, &Channel::bsc(p), Role::Y)
            .unwrap()
            .extend(Role::X, &ux, Role::U)
            .unwrap();
        let hu = j.marginal(Role::U).unwrap().entropy();
        let hxu = j.marginalize(&[Role::X, Role::U]).unwrap().entropy() - hu;
        let hyu = j.marginalize(&[Role::Y, Role::U]).unwrap().entropy() - hu;
        let bound = binary_entropy(binary_convolve(binary_entropy_inv(hxu.clamp(0.0, 1.0)), p));
        prop_assert!(hyu >= bound - 1e-9);
    }
}
