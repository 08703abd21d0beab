"""Writes the two synthetic sequences under data/ (run from this directory)."""
import os
import random

from PIL import Image, ImageDraw

W, H, FRAMES = 96, 72, 8


def walkers(name, seed, count, jitter, palette):
    rng = random.Random(seed)
    tracks = []
    for k in range(count):
        x, y = rng.randint(4, W - 24), rng.randint(4, H - 36)
        vx, vy = rng.choice([-2, -1, 1, 2]), rng.choice([-1, 0, 1])
        w, h = rng.randint(10, 16), rng.randint(22, 30)
        states = []
        for f in range(1, FRAMES + 1):
            if name == "SYN-BUSY" and k == 0 and f in (4, 5):
                continue
            states.append((f, k + 1, x, y, w, h))
            x = min(max(x + vx + rng.randint(-jitter, jitter), 0), W - w)
            y = min(max(y + vy + rng.randint(-jitter, jitter), 0), H - h)
        tracks.append((palette[k % len(palette)], states))
    return tracks


def write(name, tracks, extra_rows=()):
    root = os.path.join("data", name)
    os.makedirs(os.path.join(root, "gt"), exist_ok=True)
    os.makedirs(os.path.join(root, "img1"), exist_ok=True)
    rows = []
    for _, states in tracks:
        rows += [f"{f},{k},{x},{y},{w},{h},1,1,-1" for f, k, x, y, w, h in states]
    rows += list(extra_rows)
    with open(os.path.join(root, "gt", "gt.txt"), "w") as fh:
        fh.write("\n".join(rows) + "\n")
    with open(os.path.join(root, "seqinfo.ini"), "w") as fh:
        fh.write(f"[Sequence]\nname={name}\nimDir=img1\nframeRate=10\nseqLength={FRAMES}\n"
                 f"imWidth={W}\nimHeight={H}\nimExt=.png\n")
    for f in range(1, FRAMES + 1):
        img = Image.new("RGB", (W, H), (90, 100, 90))
        d = ImageDraw.Draw(img)
        for i in range(0, W, 12):
            d.line([(i, 0), (i, H)], fill=(70, 80, 70))
        order = sorted((s for c, st in tracks for s in st if s[0] == f), key=lambda s: s[3] + s[5])
        colors = {st[0][1]: c for c, st in tracks}
        for _, k, x, y, w, h in order:
            c = colors[k]
            d.rectangle([x, y, x + w - 1, y + h - 1], fill=c)
            d.rectangle([x + 2, y + 2, x + w - 3, y + h // 3], fill=tuple(255 - v for v in c))
        img.save(os.path.join(root, "img1", f"{f:06}.png"))


write("SYN-CALM", walkers("SYN-CALM", 3, 3, 0, [(220, 40, 40), (40, 40, 220), (240, 220, 60)]))
write("SYN-BUSY", walkers("SYN-BUSY", 5, 6, 3, [(150, 60, 60), (140, 70, 60), (160, 60, 70)]),
      extra_rows=["3,90,60,40,20,20,0,1,-1"])
