//! SA-IS: linear-time suffix sorting by induced sorting of LMS substrings.
//!
//! This is the sentinel-free formulation: the virtual end-of-text sentinel
//! is never materialised, so the recursion works on the text alphabet
//! directly.

const EMPTY: usize = usize::MAX;
const NAIVE_THRESHOLD: usize = 10;

pub fn suffix_array(text: &[u8]) -> Vec<usize> {
    let s: Vec<usize> = text.iter().map(|&b| b as usize).collect();
    sa_is(&s, 255)
}

/// Suffix array of `s`, whose symbols must all be `<= upper`.
pub fn sa_is(s: &[usize], upper: usize) -> Vec<usize> {
    let n = s.len();
    match n {
        0 => return Vec::new(),
        1 => return vec![0],
        2 => return if s[0] < s[1] { vec![0, 1] } else { vec![1, 0] },
        _ if n < NAIVE_THRESHOLD => return naive(s),
        _ => {}
    }

    // is_s[i]: suffix i is S-type (smaller than suffix i + 1).
    let mut is_s = vec![false; n];
    for i in (0..n - 1).rev() {
        is_s[i] = if s[i] == s[i + 1] {
            is_s[i + 1]
        } else {
            s[i] < s[i + 1]
        };
    }

    // bucket_l[c]: first slot of bucket c (its L-type region).
    // bucket_s[c]: first slot of the S-type region of bucket c.
    let mut bucket_l = vec![0usize; upper + 2];
    let mut bucket_s = vec![0usize; upper + 1];
    for i in 0..n {
        if is_s[i] {
            bucket_l[s[i] + 1] += 1;
        } else {
            bucket_s[s[i]] += 1;
        }
    }
    for c in 0..=upper {
        bucket_s[c] += bucket_l[c];
        bucket_l[c + 1] += bucket_s[c];
    }
    let bucket_l = &bucket_l[..];
    let bucket_s = &bucket_s[..];

    let is_lms = |i: usize| i > 0 && !is_s[i - 1] && is_s[i];
    let lms: Vec<usize> = (1..n).filter(|&i| is_lms(i)).collect();
    let m = lms.len();
    let mut lms_rank = vec![EMPTY; n];
    for (k, &p) in lms.iter().enumerate() {
        lms_rank[p] = k;
    }

    let mut sa = vec![EMPTY; n];
    induce(s, &is_s, bucket_l, bucket_s, &lms, &mut sa);

    if m > 0 {
        let sorted_lms: Vec<usize> = sa
            .iter()
            .copied()
            .filter(|&v| v != EMPTY && lms_rank[v] != EMPTY)
            .collect();

        // Name LMS substrings; equal substrings share a name.
        let end_of = |p: usize| {
            let k = lms_rank[p];
            if k + 1 < m {
                lms[k + 1]
            } else {
                n
            }
        };
        let mut reduced = vec![0usize; m];
        let mut name = 0usize;
        reduced[lms_rank[sorted_lms[0]]] = 0;
        for w in sorted_lms.windows(2) {
            let (mut l, mut r) = (w[0], w[1]);
            let (end_l, end_r) = (end_of(l), end_of(r));
            let mut same = end_l - l == end_r - r;
            if same {
                while l < end_l && s[l] == s[r] {
                    l += 1;
                    r += 1;
                }
                if l == n || r == n || s[l] != s[r] {
                    same = false;
                }
            }
            if !same {
                name += 1;
            }
            reduced[lms_rank[w[1]]] = name;
        }

        let reduced_sa = sa_is(&reduced, name);
        let ordered: Vec<usize> = reduced_sa.iter().map(|&k| lms[k]).collect();
        induce(s, &is_s, bucket_l, bucket_s, &ordered, &mut sa);
    }
    sa
}

fn induce(
    s: &[usize],
    is_s: &[bool],
    bucket_l: &[usize],
    bucket_s: &[usize],
    lms: &[usize],
    sa: &mut [usize],
) {
    let n = s.len();
    sa.fill(EMPTY);

    let mut head = bucket_s.to_vec();
    for &p in lms {
        sa[head[s[p]]] = p;
        head[s[p]] += 1;
    }

    // L-type pass, left to right. The last suffix is always L-type.
    head.copy_from_slice(&bucket_l[..bucket_s.len()]);
    sa[head[s[n - 1]]] = n - 1;
    head[s[n - 1]] += 1;
    for i in 0..n {
        let v = sa[i];
        if v != EMPTY && v > 0 && !is_s[v - 1] {
            let c = s[v - 1];
            sa[head[c]] = v - 1;
            head[c] += 1;
        }
    }

    // S-type pass, right to left, filling each bucket from its end.
    let mut tail = bucket_l.to_vec();
    for i in (0..n).rev() {
        let v = sa[i];
        if v != EMPTY && v > 0 && is_s[v - 1] {
            let c = s[v - 1];
            tail[c + 1] -= 1;
            sa[tail[c + 1]] = v - 1;
        }
    }
}

fn naive(s: &[usize]) -> Vec<usize> {
    let mut sa: Vec<usize> = (0..s.len()).collect();
    sa.sort_unstable_by(|&a, &b| s[a..].cmp(&s[b..]));
    sa
}
