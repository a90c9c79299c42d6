//! Stream programs with a reference semantics that works on whole
//! streams, indexed by `t`, instead of contexts.

use std::collections::HashMap;

/// Reference expression. Booleans are 0 and 1.
#[derive(Debug, Clone)]
pub enum S {
    C(i64),
    V(&'static str),
    /// the index itself
    T,
    Add(Box<S>, Box<S>),
    Sub(Box<S>, Box<S>),
    Mul(Box<S>, Box<S>),
    Mod(Box<S>, Box<S>),
    Eq(Box<S>, Box<S>),
    Lt(Box<S>, Box<S>),
    Gt(Box<S>, Box<S>),
    Or(Box<S>, Box<S>),
    Not(Box<S>),
    If(Box<S>, Box<S>, Box<S>),
    First(Box<S>),
    Next(Box<S>),
    Fby(Box<S>, Box<S>),
    Wvr(Box<S>, Box<S>),
    Asa(Box<S>, Box<S>),
    Upon(Box<S>, Box<S>),
}

pub fn c(v: i64) -> S {
    S::C(v)
}
pub fn v(n: &'static str) -> S {
    S::V(n)
}
pub fn add(a: S, b: S) -> S {
    S::Add(a.into(), b.into())
}
pub fn sub(a: S, b: S) -> S {
    S::Sub(a.into(), b.into())
}
pub fn mul(a: S, b: S) -> S {
    S::Mul(a.into(), b.into())
}
pub fn rem(a: S, b: S) -> S {
    S::Mod(a.into(), b.into())
}
pub fn eq(a: S, b: S) -> S {
    S::Eq(a.into(), b.into())
}
pub fn lt(a: S, b: S) -> S {
    S::Lt(a.into(), b.into())
}
pub fn gt(a: S, b: S) -> S {
    S::Gt(a.into(), b.into())
}
pub fn or(a: S, b: S) -> S {
    S::Or(a.into(), b.into())
}
pub fn not(a: S) -> S {
    S::Not(a.into())
}
pub fn cond(a: S, b: S, e: S) -> S {
    S::If(a.into(), b.into(), e.into())
}
pub fn first(a: S) -> S {
    S::First(a.into())
}
pub fn next(a: S) -> S {
    S::Next(a.into())
}
pub fn fby(a: S, b: S) -> S {
    S::Fby(a.into(), b.into())
}
pub fn wvr(a: S, b: S) -> S {
    S::Wvr(a.into(), b.into())
}
pub fn asa(a: S, b: S) -> S {
    S::Asa(a.into(), b.into())
}
pub fn upon(a: S, b: S) -> S {
    S::Upon(a.into(), b.into())
}

/// How far `wvr` and `asa` search ahead for a true position.
const HORIZON: usize = 5_000;

pub struct Unroller<'a> {
    defs: &'a [(&'static str, S)],
    memo: HashMap<(&'static str, usize), i64>,
}

impl<'a> Unroller<'a> {
    pub fn new(defs: &'a [(&'static str, S)]) -> Self {
        Unroller {
            defs,
            memo: HashMap::new(),
        }
    }

    fn var(&mut self, n: &'static str, t: usize) -> i64 {
        if let Some(x) = self.memo.get(&(n, t)) {
            return *x;
        }
        let (_, body) = self
            .defs
            .iter()
            .find(|(m, _)| *m == n)
            .expect("defined stream");
        let x = self.at(body, t);
        self.memo.insert((n, t), x);
        x
    }

    /// The `n`th position where `s` is true.
    fn nth_true(&mut self, s: &S, n: usize) -> usize {
        (0..HORIZON)
            .filter(|&i| self.at(s, i) != 0)
            .nth(n)
            .expect("enough true positions")
    }

    pub fn at(&mut self, e: &S, t: usize) -> i64 {
        let b = |x: bool| x as i64;
        match e {
            S::C(x) => *x,
            S::V(n) => self.var(n, t),
            S::T => t as i64,
            S::Add(l, r) => self.at(l, t) + self.at(r, t),
            S::Sub(l, r) => self.at(l, t) - self.at(r, t),
            S::Mul(l, r) => self.at(l, t) * self.at(r, t),
            S::Mod(l, r) => self.at(l, t).rem_euclid(self.at(r, t)),
            S::Eq(l, r) => b(self.at(l, t) == self.at(r, t)),
            S::Lt(l, r) => b(self.at(l, t) < self.at(r, t)),
            S::Gt(l, r) => b(self.at(l, t) > self.at(r, t)),
            S::Or(l, r) => b(self.at(l, t) != 0 || self.at(r, t) != 0),
            S::Not(x) => b(self.at(x, t) == 0),
            S::If(c, x, y) => {
                if self.at(c, t) != 0 {
                    self.at(x, t)
                } else {
                    self.at(y, t)
                }
            }
            S::First(x) => self.at(x, 0),
            S::Next(x) => self.at(x, t + 1),
            S::Fby(x, y) => {
                if t == 0 {
                    self.at(x, 0)
                } else {
                    self.at(y, t - 1)
                }
            }
            S::Wvr(x, y) => {
                let p = self.nth_true(y, t);
                self.at(x, p)
            }
            S::Asa(x, y) => {
                let p = self.nth_true(y, 0);
                self.at(x, p)
            }
            S::Upon(x, y) => {
                let n = (0..t).filter(|&i| self.at(y, i) != 0).count();
                self.at(x, n)
            }
        }
    }
}

pub struct StreamProgram {
    pub source: &'static str,
    pub result: S,
    pub defs: Vec<(&'static str, S)>,
}

impl StreamProgram {
    pub fn expected(&self, range: std::ops::RangeInclusive<usize>) -> Vec<i64> {
        let mut u = Unroller::new(&self.defs);
        range.map(|t| u.at(&self.result, t)).collect()
    }
}

fn nat() -> (&'static str, S) {
    ("N", fby(c(0), add(v("N"), c(1))))
}

/// Programs over the stream operators in dimension `t`.
pub fn corpus() -> Vec<StreamProgram> {
    let p = |source, result, defs| StreamProgram {
        source,
        result,
        defs,
    };
    vec![
        p("N where N = 0 fby N + 1; end", v("N"), vec![nat()]),
        p(
            "first (N * N) where N = 3 fby N + 2; end",
            first(mul(v("N"), v("N"))),
            vec![("N", fby(c(3), add(v("N"), c(2))))],
        ),
        p(
            "next N where N = 0 fby N + 1; end",
            next(v("N")),
            vec![nat()],
        ),
        p(
            "F where F = 1 fby F * 2 mod 1000; end",
            v("F"),
            vec![("F", fby(c(1), rem(mul(v("F"), c(2)), c(1000))))],
        ),
        p(
            "F where F = 0 fby G; G = 1 fby F + G; end",
            v("F"),
            vec![
                ("F", fby(c(0), v("G"))),
                ("G", fby(c(1), add(v("F"), v("G")))),
            ],
        ),
        p(
            "S where S = 0 fby S + N; N = 1 fby N + 1; end",
            v("S"),
            vec![
                ("S", fby(c(0), add(v("S"), v("N")))),
                ("N", fby(c(1), add(v("N"), c(1)))),
            ],
        ),
        p(
            "N wvr N mod 3 = 0 where N = 0 fby N + 1; end",
            wvr(v("N"), eq(rem(v("N"), c(3)), c(0))),
            vec![nat()],
        ),
        p(
            "N asa N > 10 where N = 0 fby N + 1; end",
            asa(v("N"), gt(v("N"), c(10))),
            vec![nat()],
        ),
        p(
            "N upon N mod 2 = 0 where N = 0 fby N + 1; end",
            upon(v("N"), eq(rem(v("N"), c(2)), c(0))),
            vec![nat()],
        ),
        p(
            "X fby next X where X = 5 fby X + 3; end",
            fby(v("X"), next(v("X"))),
            vec![("X", fby(c(5), add(v("X"), c(3))))],
        ),
        p(
            "first next next N where N = 0 fby N + 2; end",
            first(next(next(v("N")))),
            vec![("N", fby(c(0), add(v("N"), c(2))))],
        ),
        p(
            "if N mod 2 = 0 then N else 0 - N where N = 0 fby N + 1; end",
            cond(eq(rem(v("N"), c(2)), c(0)), v("N"), sub(c(0), v("N"))),
            vec![nat()],
        ),
        p(
            "(N wvr (N mod 2 = 1)) + (N asa N = 7) where N = 0 fby N + 1; end",
            add(
                wvr(v("N"), eq(rem(v("N"), c(2)), c(1))),
                asa(v("N"), eq(v("N"), c(7))),
            ),
            vec![nat()],
        ),
        p(
            "M where M = 0 fby (if N > M then N else M); N = 1 fby (N * 7 mod 11); end",
            v("M"),
            vec![
                ("M", fby(c(0), cond(gt(v("N"), v("M")), v("N"), v("M")))),
                ("N", fby(c(1), rem(mul(v("N"), c(7)), c(11)))),
            ],
        ),
        p(
            "P upon Q where P = 10 fby P + 10; Q = true fby not Q; end",
            upon(v("P"), v("Q")),
            vec![
                ("P", fby(c(10), add(v("P"), c(10)))),
                ("Q", fby(c(1), not(v("Q")))),
            ],
        ),
        p(
            "A wvr B where A = 0 fby A + 1; B = A mod 4 = 1 or A mod 5 = 0; end",
            wvr(v("A"), v("B")),
            vec![
                ("A", fby(c(0), add(v("A"), c(1)))),
                (
                    "B",
                    or(eq(rem(v("A"), c(4)), c(1)), eq(rem(v("A"), c(5)), c(0))),
                ),
            ],
        ),
        p(
            "next (N fby 100) where N = 0 fby N + 1; end",
            next(fby(v("N"), c(100))),
            vec![nat()],
        ),
        p(
            "X where X = 1 fby (X + first X) * 2; end",
            v("X"),
            vec![("X", fby(c(1), mul(add(v("X"), first(v("X"))), c(2))))],
        ),
        p(
            "(N asa N * N > 30) + #t where N = 0 fby N + 1; end",
            add(asa(v("N"), gt(mul(v("N"), v("N")), c(30))), S::T),
            vec![nat()],
        ),
        p(
            "first (N upon N > 3) where N = 0 fby N + 1; end",
            first(upon(v("N"), gt(v("N"), c(3)))),
            vec![nat()],
        ),
        p(
            "next.t (N wvr N mod 4 = 2) where N = 0 fby N + 1; end",
            next(wvr(v("N"), eq(rem(v("N"), c(4)), c(2)))),
            vec![nat()],
        ),
        p(
            "E where E = 0 fby (if E = 5 then 0 else E + 1); end",
            v("E"),
            vec![(
                "E",
                fby(c(0), cond(eq(v("E"), c(5)), c(0), add(v("E"), c(1)))),
            )],
        ),
        p(
            "Z fby Z + 1 where Z = #t * 3; end",
            fby(v("Z"), add(v("Z"), c(1))),
            vec![("Z", mul(S::T, c(3)))],
        ),
        p(
            "C upon C > 2 where C = 0 fby C + 1; end",
            upon(v("C"), gt(v("C"), c(2))),
            vec![("C", fby(c(0), add(v("C"), c(1))))],
        ),
        p(
            "(N wvr N mod 5 = 4) asa (N wvr N mod 5 = 4) > 30 where N = 0 fby N + 1; end",
            asa(
                wvr(v("N"), eq(rem(v("N"), c(5)), c(4))),
                gt(wvr(v("N"), eq(rem(v("N"), c(5)), c(4))), c(30)),
            ),
            vec![nat()],
        ),
        p(
            "R where R = 2 fby (if R < 40 then R * 2 else R - 37); end",
            v("R"),
            vec![(
                "R",
                fby(
                    c(2),
                    cond(lt(v("R"), c(40)), mul(v("R"), c(2)), sub(v("R"), c(37))),
                ),
            )],
        ),
    ]
}
