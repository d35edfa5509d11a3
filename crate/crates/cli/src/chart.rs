//! SVG line charts and heatmaps.

use plotters::prelude::*;

use crate::error::CliError;

const SIZE: (u32, u32) = (860, 520);

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn padded_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    let pad = if hi > lo { 0.04 * (hi - lo) } else { lo.abs().max(1.0) * 0.05 };
    Some((lo - pad, hi + pad))
}

fn chart_err(name: &str) -> impl Fn(String) -> CliError + '_ {
    move |message| CliError::Chart { name: name.to_string(), message }
}

/// Line chart; `None` when there is no finite point to draw.
pub fn line_chart(
    title: &str,
    labels: (&str, &str),
    series: &[Series],
    stamp: Option<&str>,
) -> Result<Option<String>, CliError> {
    let pts = || series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (Some(xr), Some(yr)) = (padded_range(pts().map(|p| p.0)), padded_range(pts().map(|p| p.1))) else {
        return Ok(None);
    };
    let err = chart_err(title);
    let mut buf = String::new();
    {
        let root = SVGBackend::with_string(&mut buf, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(|e| err(e.to_string()))?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 20))
            .margin(14)
            .x_label_area_size(44)
            .y_label_area_size(72)
            .build_cartesian_2d(xr.0..xr.1, yr.0..yr.1)
            .map_err(|e| err(e.to_string()))?;
        chart.configure_mesh().x_desc(labels.0).y_desc(labels.1).draw().map_err(|e| err(e.to_string()))?;
        for (k, s) in series.iter().enumerate() {
            let color = Palette99::pick(k).to_rgba();
            let finite: Vec<(f64, f64)> =
                s.points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
            chart
                .draw_series(LineSeries::new(finite, color.stroke_width(2)))
                .map_err(|e| err(e.to_string()))?
                .label(s.name.as_str())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        }
        if series.len() > 1 {
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.85))
                .border_style(BLACK)
                .draw()
                .map_err(|e| err(e.to_string()))?;
        }
        if let Some(s) = stamp {
            root.draw(&Text::new(s, (8, SIZE.1 as i32 - 16), ("sans-serif", 11))).map_err(|e| err(e.to_string()))?;
        }
        root.present().map_err(|e| err(e.to_string()))?;
    }
    Ok(Some(buf))
}

/// Cell edges halfway between neighbouring grid values.
fn edges(v: &[f64]) -> Vec<f64> {
    if v.len() == 1 {
        return vec![v[0] - 0.5, v[0] + 0.5];
    }
    let mut e = Vec::with_capacity(v.len() + 1);
    e.push(v[0] - 0.5 * (v[1] - v[0]));
    e.extend(v.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    e.push(v[v.len() - 1] + 0.5 * (v[v.len() - 1] - v[v.len() - 2]));
    e
}

/// Heatmap of `z[i * ys.len() + j]` at (xs[i], ys[j]). Non-finite cells are
/// left blank.
pub fn heatmap(
    title: &str,
    labels: (&str, &str),
    xs: &[f64],
    ys: &[f64],
    z: &[f64],
    stamp: Option<&str>,
) -> Result<Option<String>, CliError> {
    let (zmin, zmax) =
        z.iter().filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !zmin.is_finite() {
        return Ok(None);
    }
    let (ex, ey) = (edges(xs), edges(ys));
    let err = chart_err(title);
    let caption = format!("{title}  [{zmin:.4e}, {zmax:.4e}]");
    let mut buf = String::new();
    {
        let root = SVGBackend::with_string(&mut buf, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(|e| err(e.to_string()))?;
        let (x0, x1) = (ex[0].min(ex[ex.len() - 1]), ex[0].max(ex[ex.len() - 1]));
        let (y0, y1) = (ey[0].min(ey[ey.len() - 1]), ey[0].max(ey[ey.len() - 1]));
        let mut chart = ChartBuilder::on(&root)
            .caption(caption, ("sans-serif", 18))
            .margin(14)
            .x_label_area_size(44)
            .y_label_area_size(72)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(|e| err(e.to_string()))?;
        chart
            .configure_mesh()
            .x_desc(labels.0)
            .y_desc(labels.1)
            .disable_mesh()
            .draw()
            .map_err(|e| err(e.to_string()))?;
        let span = if zmax > zmin { zmax - zmin } else { 1.0 };
        let cells = (0..xs.len()).flat_map(|i| (0..ys.len()).map(move |j| (i, j))).filter_map(|(i, j)| {
            let v = z[i * ys.len() + j];
            v.is_finite().then(|| {
                let t = (v - zmin) / span;
                let color = HSLColor(0.68 * (1.0 - t), 0.85, 0.5);
                Rectangle::new([(ex[i], ey[j]), (ex[i + 1], ey[j + 1])], color.filled())
            })
        });
        chart.draw_series(cells).map_err(|e| err(e.to_string()))?;
        if let Some(s) = stamp {
            root.draw(&Text::new(s, (8, SIZE.1 as i32 - 16), ("sans-serif", 11))).map_err(|e| err(e.to_string()))?;
        }
        root.present().map_err(|e| err(e.to_string()))?;
    }
    Ok(Some(buf))
}
