use proptest::prelude::*;

use super::*;

/// Independent 7-card ranking by rank/suit histograms, no subset search.
fn direct_rank(cards: &[Card]) -> (u8, [u8; 5]) {
    let mut by_rank = [0u8; 15];
    let mut suit_masks = [0u16; 4];
    for c in cards {
        by_rank[c.rank() as usize] += 1;
        suit_masks[c.suit() as usize] |= 1 << c.rank();
    }
    let straight_high = |mask: u16| -> Option<u8> {
        let mask = if mask & (1 << 14) != 0 { mask | 0b10 } else { mask };
        (5..=14u8).rev().find(|&h| (0..5).all(|d| mask & (1 << (h - d)) != 0))
    };
    let pad = |v: &[u8]| {
        let mut out = [0u8; 5];
        out[..v.len()].copy_from_slice(v);
        out
    };
    let ranks_desc = |pred: &dyn Fn(u8) -> bool| -> Vec<u8> {
        (2..=14u8).rev().filter(|&r| by_rank[r as usize] > 0 && pred(r)).collect()
    };

    if let Some(mask) = suit_masks.iter().copied().find(|m| m.count_ones() >= 5) {
        if let Some(h) = straight_high(mask) {
            return (8, pad(&[h]));
        }
    }
    let quads = ranks_desc(&|r| by_rank[r as usize] == 4);
    if let Some(&q) = quads.first() {
        let kicker = ranks_desc(&|r| r != q)[0];
        return (7, pad(&[q, kicker]));
    }
    let trips = ranks_desc(&|r| by_rank[r as usize] == 3);
    let pairs = ranks_desc(&|r| by_rank[r as usize] == 2);
    if let Some(&t) = trips.first() {
        let partner = trips.get(1).copied().into_iter().chain(pairs.first().copied()).max();
        if let Some(p) = partner {
            return (6, pad(&[t, p]));
        }
    }
    if let Some(mask) = suit_masks.iter().copied().find(|m| m.count_ones() >= 5) {
        let top: Vec<u8> = (2..=14u8).rev().filter(|&r| mask & (1 << r) != 0).take(5).collect();
        return (5, pad(&top));
    }
    let all_mask = suit_masks.iter().fold(0u16, |a, &m| a | m);
    if let Some(h) = straight_high(all_mask) {
        return (4, pad(&[h]));
    }
    if let Some(&t) = trips.first() {
        let kick: Vec<u8> = ranks_desc(&|r| r != t).into_iter().take(2).collect();
        return (3, pad(&[t, kick[0], kick[1]]));
    }
    if pairs.len() >= 2 {
        let (a, b) = (pairs[0], pairs[1]);
        let kick = ranks_desc(&|r| r != a && r != b)[0];
        return (2, pad(&[a, b, kick]));
    }
    if let Some(&p) = pairs.first() {
        let kick: Vec<u8> = ranks_desc(&|r| r != p).into_iter().take(3).collect();
        return (1, pad(&[p, kick[0], kick[1], kick[2]]));
    }
    (0, pad(&ranks_desc(&|_| true)[..5]))
}

/// Independent equity: nested loops over the deck, ranked by `direct_rank`.
fn brute_force_equity(p1: [Card; 2], p2: [Card; 2], flop: [Card; 3]) -> (u32, u32, u32) {
    let known: Vec<Card> = p1.iter().chain(&p2).chain(&flop).copied().collect();
    let (mut w1, mut w2, mut t) = (0, 0, 0);
    for a in 0..52 {
        for b in a + 1..52 {
            let (ca, cb) = (Card::from_index(a), Card::from_index(b));
            if known.contains(&ca) || known.contains(&cb) {
                continue;
            }
            let mut h1: Vec<Card> = p1.to_vec();
            let mut h2: Vec<Card> = p2.to_vec();
            for c in [flop[0], flop[1], flop[2], ca, cb] {
                h1.push(c);
                h2.push(c);
            }
            match direct_rank(&h1).cmp(&direct_rank(&h2)) {
                std::cmp::Ordering::Greater => w1 += 1,
                std::cmp::Ordering::Less => w2 += 1,
                std::cmp::Ordering::Equal => t += 1,
            }
        }
    }
    (w1, w2, t)
}

fn hand<const N: usize>(s: &str) -> [Card; N] {
    parse_cards(s).unwrap().try_into().unwrap()
}

#[test]
fn straight_draw_against_pocket_sevens() {
    let eq = exact_showdown_equity(hand("Qh Js"), hand("7s 7d"), hand("2s 9s Ts")).unwrap();
    assert_eq!(eq.rivers, 990);
    assert_eq!((eq.p1_wins, eq.p2_wins, eq.ties), brute_force_equity(hand("Qh Js"), hand("7s 7d"), hand("2s 9s Ts")));
    assert!((eq.p1_share() - 0.6697).abs() < 0.0005, "{eq:?}");
    assert!((eq.p2_share() - 0.3303).abs() < 0.0005, "{eq:?}");
}

#[test]
fn aces_versus_kings_matches_brute_force() {
    // frozen from brute_force_equity
    let (p1, p2, flop) = (hand("Ah Ad"), hand("Kh Kd"), hand("2c 7s 9h"));
    let oracle = brute_force_equity(p1, p2, flop);
    assert_eq!(oracle, AA_KK_COUNTS);
    let eq = exact_showdown_equity(p1, p2, flop).unwrap();
    assert_eq!((eq.p1_wins, eq.p2_wins, eq.ties), oracle);
}

const AA_KK_COUNTS: (u32, u32, u32) = (907, 83, 0);

#[test]
fn royal_flush_on_flop_is_unbeatable() {
    for p2 in ["2h 2d", "Ah Ad", "9s 8s", "Kh Qd"] {
        let eq = exact_showdown_equity(hand("As Ks"), hand(p2), hand("Qs Js Ts")).unwrap();
        assert_eq!(eq.win1(), 1.0, "{p2}");
        assert_eq!(eq.tie(), 0.0);
    }
    let mut rng = RandomStream::derive(1, 1);
    for _ in 0..500 {
        assert_eq!(
            sample_showdown(hand("As Ks"), hand("2h 2d"), hand("Qs Js Ts"), &mut rng).unwrap(),
            ShowdownOutcome::P1Wins
        );
    }
}

#[test]
fn duplicate_cards_are_rejected() {
    assert!(matches!(
        exact_showdown_equity(hand("Qh Js"), hand("Qh 7d"), hand("2s 9s Ts")),
        Err(Error::DuplicateCard(_))
    ));
    assert!(sample_showdown(hand("Qh Js"), hand("7s 7d"), hand("2s 9s Js"), &mut RandomStream::derive(0, 0)).is_err());
    assert!(PokerOracle::new(hand("Qh Js"), hand("7s 7d"), hand("7s 9s Ts")).is_err());
}

#[test]
fn rigged_river_gives_p1_the_straight() {
    let (p1, p2, flop) = (hand("Qh Js"), hand("7s 7d"), hand("2s 9s Ts"));
    let target = [parse_card("Qd").unwrap(), parse_card("Kd").unwrap()];
    // search for a stream whose first river is {Qd, Kd}
    let stream = (0..100_000u64)
        .find(|&id| {
            let mut r = sample_river(p1, p2, flop, &mut RandomStream::derive(3, id)).unwrap();
            r.sort();
            r == target
        })
        .expect("some stream deals Qd Kd");
    let outcome = sample_showdown(p1, p2, flop, &mut RandomStream::derive(3, stream)).unwrap();
    assert_eq!(outcome, ShowdownOutcome::P1Wins);
}

#[test]
fn sampled_frequencies_converge_to_equity() {
    let (p1, p2, flop) = (hand("Qh Js"), hand("7s 7d"), hand("2s 9s Ts"));
    let eq = exact_showdown_equity(p1, p2, flop).unwrap();
    let n = 200_000u32;
    let mut rng = RandomStream::derive(8, 0);
    let (mut w1, mut w2, mut t) = (0u32, 0u32, 0u32);
    for _ in 0..n {
        match sample_showdown(p1, p2, flop, &mut rng).unwrap() {
            ShowdownOutcome::P1Wins => w1 += 1,
            ShowdownOutcome::P2Wins => w2 += 1,
            ShowdownOutcome::Tie => t += 1,
        }
    }
    for (count, e) in [(w1, eq.win1()), (w2, eq.win2()), (t, eq.tie())] {
        let freq = f64::from(count) / f64::from(n);
        let sigma = (e * (1.0 - e) / f64::from(n)).sqrt();
        assert!((freq - e).abs() <= 4.0 * sigma, "freq {freq} exact {e}");
    }
}

#[test]
fn poker_oracle_labels() {
    let o = PokerOracle::new(hand("Qh Js"), hand("7s 7d"), hand("2s 9s Ts")).unwrap();
    assert_eq!(o.correct_label(), LabelId(0));
    assert!((o.probability_vector().q() - 0.6697).abs() < 0.0005);

    let royal = PokerOracle::new(hand("As Ks"), hand("2h 2d"), hand("Qs Js Ts")).unwrap();
    assert_eq!(royal.probability_vector().q(), 1.0);

    let swapped = PokerOracle::new(hand("7s 7d"), hand("Qh Js"), hand("2s 9s Ts")).unwrap();
    assert_eq!(swapped.correct_label(), LabelId(1));

    let e = Example::new(0, o.correct_label());
    let mut rng = RandomStream::derive(21, 0);
    let n = 100_000;
    let t = o.query_n(&e, n, &mut rng).unwrap();
    let q = o.probability_vector().q();
    let sigma = (q * (1.0 - q) / f64::from(n)).sqrt();
    assert!((f64::from(t.counts()[0]) / f64::from(n) - q).abs() <= 4.0 * sigma);
    assert!(o.query(&Example::new(1, LabelId(2)), &mut rng).is_err());
}

#[test]
fn balanced_matchup_is_rejected() {
    // identical holdings in different suits on a rainbow flop can never differ
    assert!(matches!(
        PokerOracle::new(hand("Ah Kd"), hand("Ac Ks"), hand("2h 7d 9c")).map(|o| o.equity()),
        Err(Error::BalancedMatchup)
    ));
}

fn matchup() -> impl Strategy<Value = ([Card; 2], [Card; 2], [Card; 3])> {
    Just((0..52usize).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| {
        let c: Vec<Card> = v[..7].iter().map(|&i| Card::from_index(i)).collect();
        ([c[0], c[1]], [c[2], c[3]], [c[4], c[5], c[6]])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subset_search_agrees_with_direct_ranking(
        cards in Just((0..52usize).collect::<Vec<_>>()).prop_shuffle()
    ) {
        let seven: Vec<Card> = cards[..7].iter().map(|&i| Card::from_index(i)).collect();
        let r = evaluate7(&seven).unwrap();
        prop_assert_eq!((r.category as u8, r.tiebreak), direct_rank(&seven));
    }

    #[test]
    fn equity_is_antisymmetric((p1, p2, flop) in matchup()) {
        let a = exact_showdown_equity(p1, p2, flop).unwrap();
        let b = exact_showdown_equity(p2, p1, flop).unwrap();
        prop_assert_eq!(a.swapped(), b);
        prop_assert_eq!(a.p1_wins + a.p2_wins + a.ties, RIVERS);
        prop_assert!((a.win1() + a.win2() + a.tie() - 1.0).abs() < 1e-12);
    }
}
