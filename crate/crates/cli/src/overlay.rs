//! Bounding boxes and class tags drawn over a spectrogram raster.

use audiolabel_core::render::{Raster, Rgb};
use audiolabel_core::SelectionBox;

use crate::font::{glyph, text_width, ADVANCE, GLYPH_HEIGHT};

pub const BOX_THICKNESS: u32 = 2;
const TAG_PAD: u32 = 1;
const TAG_TEXT: Rgb = [0, 0, 0];

/// Inclusive pixel rectangle of a box, before clipping to the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

/// Pixels covered by `b` under the raster's extent mapping: the left/top
/// edges round down and the right/bottom edges round up, minus one.
pub fn box_pixels(raster: &Raster, b: &SelectionBox) -> PixelRect {
    let x0 = raster.x_of(b.t_min_s).floor() as i64;
    let x1 = raster.x_of(b.t_max_s).ceil() as i64 - 1;
    let y0 = raster.y_of(b.f_max_hz).floor() as i64;
    let y1 = raster.y_of(b.f_min_hz).ceil() as i64 - 1;
    PixelRect {
        x0,
        y0,
        x1: x1.max(x0),
        y1: y1.max(y0),
    }
}

fn put(raster: &mut Raster, x: i64, y: i64, c: Rgb) {
    if x >= 0 && y >= 0 {
        raster.set_pixel(x as u32, y as u32, c);
    }
}

fn fill(raster: &mut Raster, x0: i64, y0: i64, x1: i64, y1: i64, c: Rgb) {
    let xs = x0.max(0)..=x1.min(raster.width as i64 - 1);
    for y in y0.max(0)..=y1.min(raster.height as i64 - 1) {
        for x in xs.clone() {
            put(raster, x, y, c);
        }
    }
}

/// Outline of `r`, `BOX_THICKNESS` pixels wide, growing inward. Edges
/// past the image border are drawn at the border.
pub fn draw_rect(raster: &mut Raster, r: PixelRect, c: Rgb) {
    let (w, h) = (raster.width as i64, raster.height as i64);
    if r.x1 < 0 || r.y1 < 0 || r.x0 >= w || r.y0 >= h {
        return;
    }
    let r = PixelRect {
        x0: r.x0.max(0),
        y0: r.y0.max(0),
        x1: r.x1.min(w - 1),
        y1: r.y1.min(h - 1),
    };
    let t = BOX_THICKNESS as i64 - 1;
    fill(raster, r.x0, r.y0, r.x1, (r.y0 + t).min(r.y1), c);
    fill(raster, r.x0, (r.y1 - t).max(r.y0), r.x1, r.y1, c);
    fill(raster, r.x0, r.y0, (r.x0 + t).min(r.x1), r.y1, c);
    fill(raster, (r.x1 - t).max(r.x0), r.y0, r.x1, r.y1, c);
}

pub fn draw_text(raster: &mut Raster, x: i64, y: i64, text: &str, c: Rgb) {
    for (i, ch) in text.chars().enumerate() {
        let gx = x + (i as u32 * ADVANCE) as i64;
        for (row, bits) in glyph(ch).iter().enumerate() {
            for col in 0..5 {
                if bits & (0x10 >> col) != 0 {
                    put(raster, gx + col, y + row as i64, c);
                }
            }
        }
    }
}

/// Draws the box outline and a filled tag holding `text` at its top-left
/// corner: above the box when there is room, otherwise just inside it.
pub fn draw_labelled_box(raster: &mut Raster, b: &SelectionBox, text: &str, color: Rgb) -> PixelRect {
    let r = box_pixels(raster, b);
    draw_rect(raster, r, color);
    let tag_h = (GLYPH_HEIGHT + 2 * TAG_PAD) as i64;
    let tag_w = (text_width(text) + 2 * TAG_PAD) as i64;
    let ty = if r.y0 - tag_h >= 0 { r.y0 - tag_h } else { r.y0 };
    let tx = r.x0.max(0);
    fill(raster, tx, ty, tx + tag_w - 1, ty + tag_h - 1, color);
    draw_text(raster, tx + TAG_PAD as i64, ty + TAG_PAD as i64, text, TAG_TEXT);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use audiolabel_core::dsp::Extent;

    fn blank(w: u32, h: u32) -> Raster {
        Raster {
            width: w,
            height: h,
            rgb: vec![255; (w * h * 3) as usize],
            extent: Extent {
                t0_s: 0.0,
                t1_s: 10.0,
                f0_hz: 0.0,
                f1_hz: 1000.0,
            },
        }
    }

    #[test]
    fn pixel_rect_from_extent() {
        let r = blank(100, 50);
        let b = SelectionBox::new(2.0, 4.0, 200.0, 600.0).unwrap();
        assert_eq!(
            box_pixels(&r, &b),
            PixelRect {
                x0: 20,
                y0: 20,
                x1: 39,
                y1: 39
            }
        );
    }

    #[test]
    fn outline_only_touches_border() {
        let mut r = blank(100, 50);
        let b = SelectionBox::new(2.0, 4.0, 200.0, 600.0).unwrap();
        let rect = box_pixels(&r, &b);
        draw_rect(&mut r, rect, [255, 0, 0]);
        assert_eq!(r.pixel(20, 30), [255, 0, 0]);
        assert_eq!(r.pixel(21, 30), [255, 0, 0]);
        assert_eq!(r.pixel(22, 30), [255, 255, 255]);
        assert_eq!(r.pixel(39, 39), [255, 0, 0]);
        assert_eq!(r.pixel(40, 39), [255, 255, 255]);
    }

    #[test]
    fn boxes_past_the_edge_are_clipped() {
        let mut r = blank(100, 50);
        let b = SelectionBox::new(-5.0, 50.0, 0.0, 5000.0).unwrap();
        draw_labelled_box(&mut r, &b, "WIDE", [0, 0, 255]);
        assert_eq!(r.pixel(0, 25), [0, 0, 255]);
        assert_eq!(r.pixel(99, 25), [0, 0, 255]);
    }

    #[test]
    fn tag_text_is_drawn() {
        let mut r = blank(100, 50);
        let b = SelectionBox::new(2.0, 8.0, 100.0, 500.0).unwrap();
        draw_labelled_box(&mut r, &b, "I", [0, 255, 0]);
        // the tag sits above the box (y0 = 25) and "I" has a full-width top bar
        let tag_y = 25 - 9 + 1;
        assert_eq!(r.pixel(21 + 1, tag_y as u32), [0, 0, 0]);
        assert_eq!(r.pixel(21, tag_y as u32), [0, 255, 0]);
    }
}
