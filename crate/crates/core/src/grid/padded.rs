use super::Array3;

/// Array with `g` ghost layers on every side; indices are signed, core starts at 0.
#[derive(Clone, Debug)]
pub struct Padded {
    core: [usize; 3],
    g: usize,
    pd: [usize; 3],
    data: Vec<f64>,
}

impl Padded {
    pub fn zeros(core: [usize; 3], g: usize) -> Self {
        let pd = [core[0] + 2 * g, core[1] + 2 * g, core[2] + 2 * g];
        Padded { core, g, pd, data: vec![0.0; pd[0] * pd[1] * pd[2]] }
    }

    pub fn from_core(a: &Array3, g: usize) -> Self {
        let mut p = Padded::zeros(a.dims(), g);
        p.load_core(a);
        p
    }

    pub fn load_core(&mut self, a: &Array3) {
        debug_assert_eq!(a.dims(), self.core);
        let d = self.core;
        for k in 0..d[2] {
            for j in 0..d[1] {
                let src = a.idx(0, j, k);
                let dst = self.offset(0, j as isize, k as isize);
                self.data[dst..dst + d[0]].copy_from_slice(&a.data()[src..src + d[0]]);
            }
        }
    }

    pub fn core(&self) -> [usize; 3] {
        self.core
    }
    pub fn ghosts(&self) -> usize {
        self.g
    }

    #[inline]
    fn offset(&self, i: isize, j: isize, k: isize) -> usize {
        let g = self.g as isize;
        ((i + g) as usize) + self.pd[0] * (((j + g) as usize) + self.pd[1] * ((k + g) as usize))
    }

    #[inline]
    pub fn at(&self, i: isize, j: isize, k: isize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn at3(&self, p: [isize; 3]) -> f64 {
        self.at(p[0], p[1], p[2])
    }

    #[inline]
    pub fn set3(&mut self, p: [isize; 3], v: f64) {
        let o = self.offset(p[0], p[1], p[2]);
        self.data[o] = v;
    }

    /// Signed index range along `axis`, including ghosts.
    pub fn full_range(&self, axis: usize) -> std::ops::Range<isize> {
        -(self.g as isize)..(self.core[axis] + self.g) as isize
    }
}
