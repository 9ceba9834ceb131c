#[no_mangle]
pub fn foo() -> i64 {
    let mut result = 0;
    for i in 0..10 {
        for j in 0..10 {
            for k in 0..10 {
                if (i + j + k == 10) {
                    result += 1;
                }
            }
        }
    }
    return result
}
