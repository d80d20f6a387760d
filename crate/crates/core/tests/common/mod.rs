#![allow(dead_code)]

pub mod oracle {
    //! Reference implementations that share no code with the library's
    //! numeric paths: Hebbian weights are kept as exact integer counts, so
    //! field ties are exact zeros.

    use echomem::hopfield::BipolarPattern;

    pub fn integer_weights(patterns: &[BipolarPattern]) -> Vec<Vec<i64>> {
        let n = patterns[0].len();
        let mut c = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    for p in patterns {
                        c[i][j] += i64::from(p.values()[i]) * i64::from(p.values()[j]);
                    }
                }
            }
        }
        c
    }

    pub fn double_loop_weights(patterns: &[BipolarPattern]) -> Vec<Vec<f64>> {
        let n = patterns[0].len();
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for p in patterns {
                    w[i][j] += f64::from(p.values()[i]) * f64::from(p.values()[j]) / n as f64;
                }
            }
        }
        w
    }

    pub fn naive_step(counts: &[Vec<i64>], x: &BipolarPattern) -> BipolarPattern {
        let v = x.values();
        let next = counts
            .iter()
            .map(|row| {
                let field: i64 = row.iter().zip(v).map(|(&c, &xj)| c * i64::from(xj)).sum();
                field.signum() as i8
            })
            .collect();
        BipolarPattern::new(next).unwrap()
    }

    pub fn naive_run(counts: &[Vec<i64>], x0: &BipolarPattern, max_iterations: usize) -> (Vec<BipolarPattern>, bool) {
        let mut states = vec![x0.clone()];
        for _ in 0..max_iterations {
            let next = naive_step(counts, states.last().unwrap());
            let done = &next == states.last().unwrap();
            states.push(next);
            if done {
                return (states, true);
            }
        }
        (states, false)
    }

    pub fn all_bipolar_states(n: usize) -> Vec<BipolarPattern> {
        (0..1u32 << n)
            .map(|bits| BipolarPattern::new((0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect()).unwrap())
            .collect()
    }

    pub fn hamming(a: &BipolarPattern, b: &BipolarPattern) -> usize {
        a.values().iter().zip(b.values()).filter(|(x, y)| x != y).count()
    }

    /// Direct DFT power at bin `k` of a Hann-windowed, zero-padded signal,
    /// normalised like the library spectrum.
    pub fn dft_power(samples: &[f64], fft_len: usize, k: usize) -> f64 {
        let len = samples.len();
        let w: Vec<f64> = (0..len)
            .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
            .collect();
        let (mut re, mut im) = (0.0, 0.0);
        for n in 0..len {
            let ang = -2.0 * std::f64::consts::PI * (k * n) as f64 / fft_len as f64;
            re += samples[n] * w[n] * ang.cos();
            im += samples[n] * w[n] * ang.sin();
        }
        (re * re + im * im) / w.iter().sum::<f64>().powi(2)
    }
}

pub mod fixtures {
    use echomem::eval::ConfusionMatrix;

    pub const PIPI: &str = "PIPI";
    pub const PIPY: &str = "PIPY";

    /// Counts consistent with the published Model 1 report: supports 4193 /
    /// 4283, 1288 PIPI predicted as PIPY, 132 UnID in total.
    pub fn model1_matrix() -> ConfusionMatrix {
        ConfusionMatrix::from_counts(
            vec![PIPI.into(), PIPY.into()],
            vec![vec![2872, 1288, 33], vec![935, 3249, 99]],
        )
        .unwrap()
    }

    /// Counts consistent with the published Model 2 report: supports 2249 /
    /// 2550, 322 PIPI predicted as PIPY, 104 UnID in total.
    pub fn model2_matrix() -> ConfusionMatrix {
        ConfusionMatrix::from_counts(
            vec![PIPI.into(), PIPY.into()],
            vec![vec![1890, 322, 37], vec![513, 1970, 67]],
        )
        .unwrap()
    }
}
