mod common;

use common::naive_suffix_array;
use ddr_core::sa::suffix_array;
use proptest::prelude::*;

fn is_permutation(sa: &[usize]) -> bool {
    let mut seen = vec![false; sa.len()];
    sa.iter().all(|&i| i < seen.len() && !std::mem::replace(&mut seen[i], true))
}

#[test]
fn adversarial_inputs() {
    let mut cases: Vec<Vec<u8>> = vec![
        vec![0x01; 4_000],
        vec![0x00; 257],
        vec![0xff; 1_000],
        b"ab".repeat(1_500),
        b"abcabcabd".repeat(300),
        b"aab".repeat(777),
        [b"\x01".as_slice(), b"Nat.sqrt\x01Real.sqrt\x01Int.sqrt\x01"].concat(),
        (0..=255u8).collect(),
        (0..=255u8).rev().collect(),
    ];
    // Fibonacci word: maximally repetitive without being periodic.
    let (mut a, mut b) = (b"a".to_vec(), b"ab".to_vec());
    while b.len() < 5_000 {
        let next = [b.as_slice(), a.as_slice()].concat();
        a = std::mem::replace(&mut b, next);
    }
    cases.push(b);
    for text in cases {
        assert_eq!(suffix_array(&text), naive_suffix_array(&text), "len {}", text.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_oracle_on_random_bytes(text in prop::collection::vec(any::<u8>(), 1..2_000)) {
        let sa = suffix_array(&text);
        prop_assert!(is_permutation(&sa));
        prop_assert_eq!(sa, naive_suffix_array(&text));
    }

    #[test]
    fn matches_oracle_on_small_alphabets(text in prop::collection::vec(prop::sample::select(vec![0x01u8, b'.', b'a', b'b']), 1..3_000)) {
        prop_assert_eq!(suffix_array(&text), naive_suffix_array(&text));
    }

    #[test]
    fn suffixes_are_sorted(text in prop::collection::vec(0u8..3, 0..500)) {
        let sa = suffix_array(&text);
        prop_assert!(sa.windows(2).all(|w| text[w[0]..] < text[w[1]..]));
    }
}
