//! Exact rank of integer matrices by sparse elimination over a large prime
//! field. Incidence matrices of the test manifolds are torsion free, so the
//! rank over F_p equals the rank over Q.

use std::collections::BTreeMap;

const PRIME: u64 = 2_147_483_647;

fn inv_mod(a: u64) -> u64 {
    let mut result = 1u64;
    let mut base = a % PRIME;
    let mut exp = PRIME - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % PRIME;
        }
        base = base * base % PRIME;
        exp >>= 1;
    }
    result
}

fn to_field(v: i64) -> u64 {
    v.rem_euclid(PRIME as i64) as u64
}

/// Rank of the integer matrix given as rows of `(col, value)` pairs.
pub fn rank_mod_p(rows: &[Vec<(usize, i64)>]) -> usize {
    // pivot column -> reduced row (sorted by column, leading entry normalised to 1)
    let mut pivots: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    for row in rows {
        let mut cur: BTreeMap<usize, u64> = BTreeMap::new();
        for &(c, v) in row {
            let e = cur.entry(c).or_insert(0);
            *e = (*e + to_field(v)) % PRIME;
        }
        cur.retain(|_, v| *v != 0);
        loop {
            let Some((&lead, &lv)) = cur.iter().next() else { break };
            match pivots.get(&lead) {
                Some(prow) => {
                    for &(c, pv) in prow {
                        let e = cur.entry(c).or_insert(0);
                        *e = (*e + PRIME - lv * pv % PRIME) % PRIME;
                        if *e == 0 {
                            cur.remove(&c);
                        }
                    }
                }
                None => {
                    let s = inv_mod(lv);
                    let normalised: Vec<(usize, u64)> = cur.iter().map(|(&c, &v)| (c, v * s % PRIME)).collect();
                    pivots.insert(lead, normalised);
                    break;
                }
            }
        }
    }
    pivots.len()
}
