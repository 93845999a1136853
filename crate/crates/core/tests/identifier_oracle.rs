//! The ORCID check character against an independent formulation: a valid
//! 16-character identifier satisfies sum(d_i * 2^(16-i)) = 1 (mod 11), with
//! `X` standing for 10.

use metaforge_core::identifier::{mod11_2_check_char, validate_orcid_checksum};
use metaforge_core::AuthoritySource;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn weighted_sum_ok(id16: &str) -> bool {
    let digits: Vec<u64> = id16
        .chars()
        .map(|c| if c == 'X' { 10 } else { c.to_digit(10).unwrap() as u64 })
        .collect();
    assert_eq!(digits.len(), 16);
    let sum: u64 = digits.iter().enumerate().map(|(i, d)| d * (1u64 << (15 - i))).sum();
    sum % 11 == 1
}

#[test]
fn oracle_accepts_the_known_identifier() {
    assert!(weighted_sum_ok("0000000222562421"));
    assert!(validate_orcid_checksum("0000-0002-2256-2421").unwrap());
    assert!(AuthoritySource::Orcid.is_canonical_iri("https://orcid.org/0000-0002-2256-2421"));
}

#[test]
fn every_single_digit_mutation_fails() {
    let good: Vec<char> = "0000000222562421".chars().collect();
    let mut mutations = 0;
    for pos in 0..16 {
        for d in '0'..='9' {
            if d == good[pos] {
                continue;
            }
            let mut m = good.clone();
            m[pos] = d;
            let s: String = m.iter().collect();
            assert!(!validate_orcid_checksum(&s).unwrap(), "{s}");
            assert!(!weighted_sum_ok(&s));
            mutations += 1;
        }
    }
    assert_eq!(mutations, 16 * 9);
}

#[test]
fn all_zero_body_needs_check_one() {
    assert_eq!(mod11_2_check_char("000000000000000"), Some('1'));
    assert!(!validate_orcid_checksum("0000000000000000").unwrap());
    assert!(validate_orcid_checksum("0000000000000001").unwrap());
}

#[test]
fn oracle_agrees_on_random_identifiers() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0DC1D);
    let mut valid = 0;
    for _ in 0..10_000 {
        let mut id: String = (0..15).map(|_| char::from(b'0' + rng.gen_range(0..10))).collect();
        let last = match rng.gen_range(0..11) {
            10 => 'X',
            d => char::from(b'0' + d),
        };
        id.push(last);
        let ours = validate_orcid_checksum(&id).unwrap();
        assert_eq!(ours, weighted_sum_ok(&id), "{id}");
        valid += usize::from(ours);
    }
    // About one in eleven random check characters is right.
    assert!((700..1200).contains(&valid), "{valid}");
}

#[test]
fn computed_check_characters_satisfy_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let body: String = (0..15).map(|_| char::from(b'0' + rng.gen_range(0..10))).collect();
        let full = format!("{body}{}", mod11_2_check_char(&body).unwrap());
        assert!(weighted_sum_ok(&full), "{full}");
    }
}

#[test]
fn malformed_input_is_an_error() {
    for bad in ["", "0000-0002-2256", "0000-0002-2256-242Y", "X000000222562421"] {
        assert!(validate_orcid_checksum(bad).is_err(), "{bad}");
    }
}
