/// Probabilists' Hermite polynomial `He_k(x)` by the three-term recurrence
/// `He_{k+1} = x He_k - k He_{k-1}`.
pub fn hermite_value(k: u32, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for j in 1..k {
                let next = x * cur - f64::from(j) * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}
