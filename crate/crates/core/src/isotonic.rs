//! Pool-adjacent-violators projection onto monotone sequences.

/// Weighted least-squares projection of `values` onto non-decreasing
/// sequences (or non-increasing ones when `increasing` is false).
pub fn isotonic_fit(values: &[f64], weights: &[f64], increasing: bool) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    let sign = if increasing { 1.0 } else { -1.0 };
    // blocks of (weighted mean, total weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((sign * v, w, 1));
        while blocks.len() > 1 {
            let (m2, w2, n2) = blocks[blocks.len() - 1];
            let (m1, w1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            let w = w1 + w2;
            let m = if w > 0.0 {
                (m1 * w1 + m2 * w2) / w
            } else {
                0.5 * (m1 + m2)
            };
            blocks.truncate(blocks.len() - 2);
            blocks.push((m, w, n1 + n2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, n)| std::iter::repeat_n(sign * m, n))
        .collect()
}
