//! Offsets of each named weight block inside the flat parameter vector.

/// Shape of one named parameter block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub name: &'static str,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Parameter layout of the gated cell plus affine decoder.
///
/// Gate blocks: `w_*` is `p × d` (input), `u_*` is `p × p` (recurrent), `b_*`
/// is `p`. The time-gated variant adds a `decay` vector of length `p`. The
/// decoder is `w_out` (`d × p`) and `b_out` (`d`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub time_gated: bool,
    pub w_z: usize,
    pub u_z: usize,
    pub b_z: usize,
    pub w_r: usize,
    pub u_r: usize,
    pub b_r: usize,
    pub w_c: usize,
    pub u_c: usize,
    pub b_c: usize,
    pub decay: Option<usize>,
    pub w_out: usize,
    pub b_out: usize,
    pub len: usize,
}

impl Layout {
    pub fn new(input_dim: usize, hidden_dim: usize, time_gated: bool) -> Self {
        let (d, p) = (input_dim, hidden_dim);
        let mut at = 0;
        let mut take = |n: usize| {
            let o = at;
            at += n;
            o
        };
        let w_z = take(p * d);
        let u_z = take(p * p);
        let b_z = take(p);
        let w_r = take(p * d);
        let u_r = take(p * p);
        let b_r = take(p);
        let w_c = take(p * d);
        let u_c = take(p * p);
        let b_c = take(p);
        let decay = time_gated.then(|| take(p));
        let w_out = take(d * p);
        let b_out = take(d);
        Self {
            input_dim,
            hidden_dim,
            time_gated,
            w_z,
            u_z,
            b_z,
            w_r,
            u_r,
            b_r,
            w_c,
            u_c,
            b_c,
            decay,
            w_out,
            b_out,
            len: at,
        }
    }

    /// Every block in storage order.
    pub fn blocks(&self) -> Vec<Block> {
        let (d, p) = (self.input_dim, self.hidden_dim);
        let b = |name, offset, rows, cols| Block {
            name,
            offset,
            rows,
            cols,
        };
        let mut out = vec![
            b("w_z", self.w_z, p, d),
            b("u_z", self.u_z, p, p),
            b("b_z", self.b_z, p, 1),
            b("w_r", self.w_r, p, d),
            b("u_r", self.u_r, p, p),
            b("b_r", self.b_r, p, 1),
            b("w_c", self.w_c, p, d),
            b("u_c", self.u_c, p, p),
            b("b_c", self.b_c, p, 1),
        ];
        if let Some(o) = self.decay {
            out.push(b("decay", o, p, 1));
        }
        out.push(b("w_out", self.w_out, d, p));
        out.push(b("b_out", self.b_out, d, 1));
        out
    }

    pub fn block(&self, name: &str) -> Option<Block> {
        self.blocks().into_iter().find(|b| b.name == name)
    }

    /// Fan-in used for uniform initialisation of a block.
    pub(crate) fn fan_in(&self, block: &Block) -> usize {
        match block.name {
            "w_out" | "b_out" => self.hidden_dim,
            "decay" => 1,
            _ => self.input_dim + self.hidden_dim,
        }
    }
}
