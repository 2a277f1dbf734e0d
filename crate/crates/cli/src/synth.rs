//! Seeded synthetic intensity pages: eight horizontal text-line bands of rectangular
//! sentence segments between a left and a right title block.
//!
//! Gaps between consecutive segments are drawn from three regimes: narrow (6 to 14
//! px), medium (30 to 50 px) and wide (170 to 230 px). Every page carries at least one
//! wide gap. All shapes keep a 12 px margin from the page border.

use linelayout::raster::{LabelImage, Rect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MARGIN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapRegime {
    Narrow,
    Medium,
    Wide,
}

impl GapRegime {
    fn sample(self, rng: &mut ChaCha8Rng) -> usize {
        match self {
            Self::Narrow => rng.random_range(6..=14),
            Self::Medium => rng.random_range(30..=50),
            Self::Wide => rng.random_range(170..=230),
        }
    }

    fn draw(rng: &mut ChaCha8Rng) -> Self {
        match rng.random_range(0..10) {
            0..=2 => Self::Narrow,
            3..=6 => Self::Medium,
            _ => Self::Wide,
        }
    }
}

/// Page `index` of the series for `seed`; each page has its own ChaCha stream so pages
/// can be generated in any order.
pub fn synth_page(seed: u64, index: u64, size: (usize, usize)) -> LabelImage {
    let (w, h) = size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut img = LabelImage::filled(w, h, 0).expect("positive page size");
    if w < 8 * MARGIN || h < 8 * MARGIN {
        return img;
    }

    let title_w = (w / 20).max(8);
    let inner = h - 2 * MARGIN;
    for (code, x) in [(180u8, MARGIN), (200u8, w - MARGIN - title_w)] {
        let th = rng.random_range(inner / 3..=inner * 2 / 3);
        let y = MARGIN + rng.random_range(0..=inner - th);
        img.fill_rect(Rect::new(x, y, title_w, th), code);
    }

    let x_start = MARGIN + title_w + 40;
    let x_end = w - MARGIN - title_w - 40;
    let pitch = inner / 8;
    let forced_line = rng.random_range(0..8);
    for line in 0..8usize {
        let code = 20 * (line as u8 + 1);
        let thickness = rng.random_range(pitch * 3 / 10..=pitch / 2).max(3);
        let band_y = MARGIN + line * pitch + (pitch - thickness) / 2;
        let mut x = x_start + rng.random_range(0..30);
        let mut first = true;
        while x < x_end {
            let seg_w = rng.random_range(40..=400).min(x_end - x);
            if seg_w < 20 {
                break;
            }
            let dy = rng.random_range(0..=4) as isize - 2;
            let dh = rng.random_range(0..=4) as isize - 2;
            let y = (band_y as isize + dy) as usize;
            let seg_h = (thickness as isize + dh).max(3) as usize;
            img.fill_rect(Rect::new(x, y, seg_w, seg_h), code);
            let regime = if first && line == forced_line { GapRegime::Wide } else { GapRegime::draw(&mut rng) };
            first = false;
            x += seg_w + regime.sample(&mut rng);
        }
    }
    img
}

pub fn synth_pages(count: usize, seed: u64, size: (usize, usize)) -> Vec<LabelImage> {
    (0..count as u64).map(|i| synth_page(seed, i, size)).collect()
}
