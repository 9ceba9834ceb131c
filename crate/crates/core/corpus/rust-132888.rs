#![no_main]
#[no_mangle]
pub struct Point {
    x: i32,
    y: i32,
}

#[no_mangle]
pub fn f(a: Point) -> i32 {
    if a.x > 0 && a.y < 0 || a.x < 0 && a.y > 0 {
        a.x * a.y
    } else {
        a.x + a.y
    }
}
