//! Small 3-vector helpers. Positions are meters in a right-handed frame.

pub type Vec3 = [f64; 3];

pub fn euclidean(a: &Vec3, b: &Vec3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

pub fn squared_distance(a: &Vec3, b: &Vec3) -> f64 {
    (0..3).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum()
}

/// Arithmetic mean of a nonempty set of points.
pub fn centroid<'a, I>(points: I) -> Option<Vec3>
where
    I: IntoIterator<Item = &'a Vec3>,
{
    let mut sum = [0.0; 3];
    let mut n = 0usize;
    for p in points {
        for i in 0..3 {
            sum[i] += p[i];
        }
        n += 1;
    }
    if n == 0 {
        return None;
    }
    Some([sum[0] / n as f64, sum[1] / n as f64, sum[2] / n as f64])
}

pub fn is_finite(p: &Vec3) -> bool {
    p.iter().all(|c| c.is_finite())
}
