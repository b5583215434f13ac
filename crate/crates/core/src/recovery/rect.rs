//! Static orthogonal range reporting over integer points.
//!
//! Points are sorted by `x`; level `h` splits that order into chunks of
//! `LEAF << h` entries, each sorted by `y`. A query covers its `x` interval
//! with O(log n) chunks and binary-searches each for the `y` interval.

const LEAF: usize = 16;

pub(crate) struct RectIndex {
    /// `(x, y, id)` by ascending `x`.
    by_x: Vec<(u32, u32, u32)>,
    /// `(y, id)` per level, sorted by `y` within each chunk.
    levels: Vec<Vec<(u32, u32)>>,
}

fn merge_into(a: &[(u32, u32)], b: &[(u32, u32)], out: &mut Vec<(u32, u32)>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

impl RectIndex {
    pub(crate) fn new(mut points: Vec<(u32, u32, u32)>) -> Self {
        points.sort_unstable();
        let n = points.len();
        let mut base: Vec<(u32, u32)> = points.iter().map(|&(_, y, id)| (y, id)).collect();
        for chunk in base.chunks_mut(LEAF) {
            chunk.sort_unstable();
        }
        let mut levels = vec![base];
        let mut size = LEAF;
        while size < n {
            let prev = levels.last().expect("base level");
            let mut next = Vec::with_capacity(n);
            for start in (0..n).step_by(2 * size) {
                let mid = (start + size).min(n);
                let end = (start + 2 * size).min(n);
                merge_into(&prev[start..mid], &prev[mid..end], &mut next);
            }
            levels.push(next);
            size *= 2;
        }
        RectIndex { by_x: points, levels }
    }

    /// Reports the id of every point with `x` in `xs` and `y` in `ys`, both
    /// inclusive.
    pub(crate) fn query<F: FnMut(u32)>(&self, xs: (u32, u32), ys: (u32, u32), mut report: F) {
        let mut lo = self.by_x.partition_point(|p| p.0 < xs.0);
        let mut hi = self.by_x.partition_point(|p| p.0 <= xs.1);
        let mut raw = |i: usize| {
            let (_, y, id) = self.by_x[i];
            if ys.0 <= y && y <= ys.1 {
                report(id);
            }
        };
        while lo < hi && lo % LEAF != 0 {
            raw(lo);
            lo += 1;
        }
        while lo < hi && hi % LEAF != 0 {
            hi -= 1;
            raw(hi);
        }
        while lo < hi {
            let mut h = 0;
            while h + 1 < self.levels.len() && lo % (LEAF << (h + 1)) == 0 && lo + (LEAF << (h + 1)) <= hi {
                h += 1;
            }
            let chunk = &self.levels[h][lo..lo + (LEAF << h)];
            let from = chunk.partition_point(|p| p.0 < ys.0);
            for &(y, id) in &chunk[from..] {
                if y > ys.1 {
                    break;
                }
                report(id);
            }
            lo += LEAF << h;
        }
    }
}
