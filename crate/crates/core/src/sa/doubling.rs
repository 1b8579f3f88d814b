//! Prefix doubling: ranks suffixes by their first 2^k bytes, doubling k
//! until all ranks are distinct. O(n log^2 n) with a comparison sort.

pub fn suffix_array(text: &[u8]) -> Vec<usize> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sa: Vec<usize> = (0..n).collect();
    let mut rank: Vec<usize> = text.iter().map(|&b| b as usize).collect();
    let mut next = vec![0usize; n];
    let mut width = 1;
    loop {
        // Missing second halves rank below every present byte.
        let key = |i: usize| (rank[i], if i + width < n { rank[i + width] + 1 } else { 0 });
        sa.sort_unstable_by_key(|&i| key(i));
        next[sa[0]] = 0;
        for w in 1..n {
            let bump = usize::from(key(sa[w - 1]) != key(sa[w]));
            next[sa[w]] = next[sa[w - 1]] + bump;
        }
        std::mem::swap(&mut rank, &mut next);
        if rank[sa[n - 1]] == n - 1 || width >= n {
            break;
        }
        width *= 2;
    }
    sa
}
