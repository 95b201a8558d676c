//! Naive reference matchers.
//!
//! Every model is evaluated character by character, straight from its
//! definition, with no packing and no word arithmetic. These are the ground
//! truth the packed matchers are tested against, so they deliberately share
//! no code with `bitword` or `matchers`.

use crate::matchers::MatchReport;
use crate::packed::MatchModel;

/// Hamming distance of two equal-length strings.
pub fn oracle_hamming(a: &[u16], b: &[u16]) -> Result<u64, crate::Error> {
    if a.len() != b.len() {
        return Err(crate::Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count() as u64)
}

fn abs_diff(a: u16, b: u16) -> u64 {
    u64::from(a.max(b) - a.min(b))
}

/// All positions of `text` matching `pattern` under `model`, with the
/// model's count (mismatches or difference sum) per position.
pub fn oracle_search(pattern: &[u16], text: &[u16], model: &MatchModel) -> MatchReport {
    let m = pattern.len();
    let mut report = MatchReport::with_counts();
    if m == 0 || text.len() < m {
        return report;
    }
    let deltas_for = |deltas: &crate::packed::Deltas| -> Vec<u16> {
        match deltas {
            crate::packed::Deltas::Uniform(d) => vec![*d; m],
            crate::packed::Deltas::PerPosition(v) => {
                assert_eq!(v.len(), m, "delta vector length");
                v.clone()
            }
        }
    };

    for j in 0..=text.len() - m {
        let window = &text[j..j + m];
        let hit: Option<u64> = match model {
            MatchModel::KMismatch { k } => {
                let d = pattern.iter().zip(window).filter(|(p, t)| p != t).count() as u64;
                (d <= u64::from(*k)).then_some(d)
            }
            MatchModel::KMismatchWildcard { k, wildcard } => {
                let d = pattern
                    .iter()
                    .zip(window)
                    .filter(|&(&p, &t)| p != t && p != *wildcard && t != *wildcard)
                    .count() as u64;
                (d <= u64::from(*k)).then_some(d)
            }
            MatchModel::DeltaKMismatch { deltas, k } => {
                let ds = deltas_for(deltas);
                let d = pattern
                    .iter()
                    .zip(window)
                    .zip(&ds)
                    .filter(|&((&p, &t), &dl)| abs_diff(p, t) > u64::from(dl))
                    .count() as u64;
                (d <= u64::from(*k)).then_some(d)
            }
            MatchModel::DeltaExact { deltas } => {
                let ds = deltas_for(deltas);
                let ok = pattern
                    .iter()
                    .zip(window)
                    .zip(&ds)
                    .all(|((&p, &t), &dl)| abs_diff(p, t) <= u64::from(dl));
                ok.then_some(0)
            }
            MatchModel::LessThan => {
                let ok = pattern.iter().zip(window).all(|(&p, &t)| p <= t);
                ok.then_some(0)
            }
            MatchModel::DeltaGamma { deltas, gamma } => {
                let ds = deltas_for(deltas);
                let all_delta = pattern
                    .iter()
                    .zip(window)
                    .zip(&ds)
                    .all(|((&p, &t), &dl)| abs_diff(p, t) <= u64::from(dl));
                let sum: u64 = pattern.iter().zip(window).map(|(&p, &t)| abs_diff(p, t)).sum();
                (all_delta && sum <= *gamma).then_some(sum)
            }
            MatchModel::DeltaKGamma {
                deltas,
                k,
                gamma,
                raw_sum,
            } => {
                let ds = deltas_for(deltas);
                let violations = pattern
                    .iter()
                    .zip(window)
                    .zip(&ds)
                    .filter(|&((&p, &t), &dl)| abs_diff(p, t) > u64::from(dl))
                    .count() as u64;
                let sum: u64 = pattern
                    .iter()
                    .zip(window)
                    .zip(&ds)
                    .map(|((&p, &t), &dl)| {
                        let d = abs_diff(p, t);
                        if *raw_sum || d <= u64::from(dl) {
                            d
                        } else {
                            0
                        }
                    })
                    .sum();
                (violations <= u64::from(*k) && sum <= *gamma).then_some(sum)
            }
        };
        if let Some(count) = hit {
            report.push(j, Some(count));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packed::Deltas;

    #[test]
    fn hamming_examples() {
        assert_eq!(oracle_hamming(&[1, 2, 1], &[1, 2, 3]).unwrap(), 1);
        assert_eq!(oracle_hamming(&[5, 5], &[5, 5]).unwrap(), 0);
        assert!(oracle_hamming(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn figure_instance() {
        let rep = oracle_search(
            &[1, 2, 1],
            &[1, 2, 3, 3, 2, 3, 1, 2],
            &MatchModel::KMismatch { k: 1 },
        );
        assert_eq!(rep.positions(), &[0]);
        let rep = oracle_search(
            &[1, 2, 1],
            &[1, 2, 3, 3, 2, 3, 1, 2],
            &MatchModel::KMismatch { k: 2 },
        );
        assert_eq!(rep.positions(), &[0, 3, 4]);
    }

    #[test]
    fn self_match() {
        let t = [3u16, 1, 4, 1, 5];
        let rep = oracle_search(&t, &t, &MatchModel::KMismatch { k: 0 });
        assert_eq!(rep.positions(), &[0]);
    }

    /// A second evaluation of the same definitions, written as plain index
    /// loops, to cross-check the iterator-style implementation above.
    fn second_opinion(pattern: &[u16], text: &[u16], model: &MatchModel) -> Vec<usize> {
        let m = pattern.len();
        let mut out = Vec::new();
        if m == 0 || text.len() < m {
            return out;
        }
        for j in 0..=(text.len() - m) {
            let ok = match model {
                MatchModel::KMismatch { k } => {
                    let mut d = 0u64;
                    for h in 0..m {
                        if text[j + h] != pattern[h] {
                            d += 1;
                        }
                    }
                    d <= u64::from(*k)
                }
                MatchModel::DeltaGamma { deltas, gamma } => {
                    let ds = match deltas {
                        Deltas::Uniform(d) => vec![*d; m],
                        Deltas::PerPosition(v) => v.clone(),
                    };
                    let mut ok = true;
                    let mut sum = 0u64;
                    for h in 0..m {
                        let d = abs_diff(text[j + h], pattern[h]);
                        if d > u64::from(ds[h]) {
                            ok = false;
                        }
                        sum += d;
                    }
                    ok && sum <= *gamma
                }
                _ => unimplemented!(),
            };
            if ok {
                out.push(j);
            }
        }
        out
    }

    #[test]
    fn cross_checked_by_second_implementation() {
        let mut state = 0x1234_5678_9ABC_DEF0u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state
        };
        for _ in 0..200 {
            let n = (next() % 60) as usize;
            let m = 1 + (next() % 6) as usize;
            let text: Vec<u16> = (0..n).map(|_| (next() % 8) as u16).collect();
            let pattern: Vec<u16> = (0..m).map(|_| (next() % 8) as u16).collect();
            let k = (next() % 4) as u32;
            let model = MatchModel::KMismatch { k };
            assert_eq!(
                oracle_search(&pattern, &text, &model).positions(),
                second_opinion(&pattern, &text, &model)
            );
            let model = MatchModel::DeltaGamma {
                deltas: Deltas::Uniform((next() % 4) as u16),
                gamma: next() % 10,
            };
            assert_eq!(
                oracle_search(&pattern, &text, &model).positions(),
                second_opinion(&pattern, &text, &model)
            );
        }
    }
}
