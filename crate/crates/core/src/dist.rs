//! Standard normal and Student t distribution functions.

use statrs::function::beta;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

// Cody's rational Chebyshev approximations (ACM TOMS 715), in the
// arrangement used for the normal distribution function.
const CODY_A: [f64; 5] = [
    2.235_252_035_460_683_9,
    161.028_231_068_555_88,
    1_067.689_485_460_371,
    18_154.981_253_343_56,
    0.065_682_337_918_207_45,
];
const CODY_B: [f64; 4] = [47.202_581_904_688_24, 976.098_551_737_776_7, 10_260.932_208_618_978, 45_507.789_335_026_73];
const CODY_C: [f64; 9] = [
    0.398_941_512_088_134_66,
    8.883_149_794_388_376,
    93.506_656_132_177_86,
    597.270_276_394_800_3,
    2_494.537_585_290_372_7,
    6_848.190_450_536_283,
    11_602.651_437_647_35,
    9_842.714_838_383_978,
    1.076_557_677_372_019_2e-8,
];
const CODY_D: [f64; 8] = [
    22.266_688_044_328_116,
    235.387_901_782_625,
    1_519.377_599_407_554_8,
    6_485.558_298_266_761,
    18_615.571_640_885_097,
    34_900.952_721_145_98,
    38_912.003_286_093_27,
    19_685.429_676_859_99,
];
const CODY_P: [f64; 6] = [
    0.215_898_534_057_957,
    0.127_401_161_160_247_36,
    0.022_235_277_870_649_807,
    0.001_421_619_193_227_893_5,
    2.911_287_495_116_879_2e-5,
    0.023_073_441_764_940_17,
];
const CODY_Q: [f64; 5] = [
    1.284_260_096_144_911,
    0.468_238_212_480_865_1,
    0.065_988_137_868_928_55,
    0.003_782_396_332_027_582_4,
    7.297_515_550_839_662e-5,
];

pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, accurate to about one unit in
/// the last place over the whole line.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let y = x.abs();
    if y <= 0.674_489_75 {
        let (mut num, mut den) = (0.0, 0.0);
        if y > f64::EPSILON * 0.5 {
            let xsq = x * x;
            num = CODY_A[4] * xsq;
            den = xsq;
            for i in 0..3 {
                num = (num + CODY_A[i]) * xsq;
                den = (den + CODY_B[i]) * xsq;
            }
        }
        return 0.5 + x * (num + CODY_A[3]) / (den + CODY_B[3]);
    }
    let tail = if y <= 32f64.sqrt() {
        let mut num = CODY_C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + CODY_C[i]) * y;
            den = (den + CODY_D[i]) * y;
        }
        gauss_factor(y) * (num + CODY_C[7]) / (den + CODY_D[7])
    } else {
        let xsq = 1.0 / (x * x);
        let mut num = CODY_P[5] * xsq;
        let mut den = xsq;
        for i in 0..4 {
            num = (num + CODY_P[i]) * xsq;
            den = (den + CODY_Q[i]) * xsq;
        }
        let r = xsq * (num + CODY_P[4]) / (den + CODY_Q[4]);
        gauss_factor(y) * (FRAC_1_SQRT_2PI - r) / y
    };
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// `exp(-y^2/2)` with the square split to limit cancellation error.
fn gauss_factor(y: f64) -> f64 {
    let head = (y * 16.0).trunc() / 16.0;
    let del = (y - head) * (y + head);
    (-head * head * 0.5).exp() * (-del * 0.5).exp()
}

/// Student t distribution function via the regularized incomplete beta
/// function, `P(T <= x) = 1 - I_{df/(df+x^2)}(df/2, 1/2) / 2` for `x > 0`.
pub fn student_t_cdf(df: f64, x: f64) -> f64 {
    assert!(df > 0.0, "degrees of freedom must be positive");
    if x == 0.0 {
        return 0.5;
    }
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let z = df / (df + x * x);
    let tail = 0.5 * beta::beta_reg(0.5 * df, 0.5, z);
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}
