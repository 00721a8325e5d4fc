// Muted-video element factory. Clips must play silent no matter what:
// the training effect depends on lipreading, not listening, so the
// element is muted at creation, the attribute is pinned for markup
// checks, and any attempt to unmute is reverted on the spot.

export function createMutedVideo(src: string): HTMLVideoElement {
  const video = document.createElement("video");
  video.muted = true;
  video.defaultMuted = true;
  video.setAttribute("muted", "");
  video.setAttribute("playsinline", "");
  video.controls = true;
  video.addEventListener("volumechange", () => {
    if (!video.muted) {
      video.muted = true;
    }
  });
  video.src = src;
  return video;
}

export function replay(video: HTMLVideoElement): void {
  video.muted = true;
  video.currentTime = 0;
  const p = video.play();
  if (p && typeof p.catch === "function") {
    // Autoplay rejection is fine; the user can hit the native control.
    p.catch(() => undefined);
  }
}
