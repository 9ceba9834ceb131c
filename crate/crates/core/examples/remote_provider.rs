// Talk to a chat-completion endpoint. A one-shot local server stands in for
// the model so the example needs no network.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;

use sizeprobe::catalog::default_catalog;
use sizeprobe::language::builtin_profile;
use sizeprobe::mutation::{build_prompt, extract_code, ProviderConfig, ProviderKind};

fn serve_once(listener: TcpListener, answer: String) {
    let (stream, _) = listener.accept().expect("accept");
    let mut reader = BufReader::new(stream);
    let mut len = 0;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).expect("header");
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().expect("length");
        }
        if line == "\r\n" {
            break;
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).expect("body");
    let reply = serde_json::json!({ "choices": [{ "message": { "role": "assistant", "content": answer } }] }).to_string();
    let mut stream = reader.into_inner();
    write!(stream, "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{reply}", reply.len())
        .expect("reply");
}

pub fn run_example() -> sizeprobe::Result<()> {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
    let addr = listener.local_addr().expect("addr");
    let answer = "Sure:\n```c\nint f(int a) {\n  if (0) { a += 1; }\n  return 0;\n}\n```\n".to_string();
    let server = std::thread::spawn(move || serve_once(listener, answer));

    let cfg = ProviderConfig {
        kind: ProviderKind::Remote,
        endpoint: Some(format!("http://{addr}/v1/chat/completions")),
        model: Some("local-model".into()),
        ..Default::default()
    };
    let profile = builtin_profile("c")?;
    let provider = cfg.build(&profile)?;
    let instruction = default_catalog().into_iter().find(|i| i.id == "cf-dead-conditional").expect("catalog entry");
    let prompt = build_prompt(&profile, &instruction, &profile.seed_code);
    let raw = provider.mutate(&prompt)?;
    server.join().expect("server");
    println!("{}", extract_code(&raw, &profile)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
