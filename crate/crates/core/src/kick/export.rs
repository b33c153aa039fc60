use std::fmt::Write as _;
use std::io::Write;

use super::SimLog;

pub const ZMP_CSV_HEADER: &str = "t,zx,zy,refx,refy,inside";

fn write_rows<W: Write>(
    mut w: W,
    header: &str,
    n: usize,
    mut row: impl FnMut(usize, &mut String),
) -> std::io::Result<()> {
    let mut s = String::with_capacity(64 * (n + 1));
    s.push_str(header);
    s.push('\n');
    for k in 0..n {
        row(k, &mut s);
        s.push('\n');
    }
    w.write_all(s.as_bytes())
}

pub fn write_zmp_csv<W: Write>(w: W, log: &SimLog) -> std::io::Result<()> {
    write_rows(w, ZMP_CSV_HEADER, log.len(), |k, s| {
        let (z, r) = (log.zmp[k], log.zmp_ref[k]);
        let _ = write!(
            s,
            "{:.2},{:.9e},{:.9e},{:.9e},{:.9e},{}",
            log.times[k], z[0], z[1], r[0], r[1], log.inside[k] as u8
        );
    })
}

pub fn write_foot_csv<W: Write>(w: W, log: &SimLog) -> std::io::Result<()> {
    write_rows(w, "t,set_x,set_y,set_z,model_x,model_y,model_z", log.len(), |k, s| {
        let (p, m) = (log.foot_setpoint[k], log.foot_model[k]);
        let _ = write!(
            s,
            "{:.2},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            log.times[k], p[0], p[1], p[2], m[0], m[1], m[2]
        );
    })
}

pub fn write_com_csv<W: Write>(w: W, log: &SimLog) -> std::io::Result<()> {
    write_rows(w, "t,body_set_x,body_set_y,body_model_x,body_model_y,com_x,com_y", log.len(), |k, s| {
        let (b, m, c) = (log.body_setpoint[k], log.body_model[k], log.com[k]);
        let _ = write!(
            s,
            "{:.2},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            log.times[k], b[0], b[1], m[0], m[1], c[0], c[1]
        );
    })
}
