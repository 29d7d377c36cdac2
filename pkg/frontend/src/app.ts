import { ApiClient, Plane } from './api.js';
import { ViewerState, PARAM_RANGES } from './state.js';
import { mmToPixel, pixelToMm, planeCount, sliceShape } from './transforms.js';

const PLANES: Plane[] = ['axial', 'sagittal', 'coronal'];

export class ViewerApp {
  private state = new ViewerState();
  private root: HTMLElement;
  private canvas!: HTMLCanvasElement;
  private sliceImage: HTMLImageElement | null = null;

  constructor(root: HTMLElement, private api: ApiClient = new ApiClient()) {
    this.root = root;
    this.buildLayout();
  }

  private el<T extends HTMLElement>(selector: string): T {
    const found = this.root.querySelector(selector);
    if (!found) throw new Error(`missing element ${selector}`);
    return found as T;
  }

  private buildLayout(): void {
    this.root.innerHTML = `
      <div id="banner" class="banner hidden"><span id="banner-text"></span>
        <button id="banner-close">&times;</button></div>
      <div class="columns">
        <div class="panel">
          <h3>Volume</h3>
          <label>Header (.mhd) <input type="file" id="file-mhd"></label>
          <label>Raw (.raw) <input type="file" id="file-raw"></label>
          <button id="upload">Upload</button>
          <div id="volume-info" class="muted"></div>
          <h3>Parameters</h3>
          <label>&Delta; <input type="number" id="param-delta" value="2" min="0" max="10"></label>
          <label>edge (mm) <input type="number" id="param-edge_mm" value="80"></label>
          <label>rays/edge (m) <input type="number" id="param-m" value="15"></label>
          <label>nodes/ray (k) <input type="number" id="param-k" value="40"></label>
          <button id="run" disabled>Run segmentation</button>
          <div id="seed-info" class="muted">seed: click a slice</div>
          <div id="warnings" class="warnings"></div>
          <h3>Evaluation</h3>
          <label>Reference mask (.mhd) <input type="file" id="file-ref-mhd"></label>
          <label>Reference raw <input type="file" id="file-ref-raw"></label>
          <div id="dsc-panel" class="muted">DSC: &ndash;</div>
          <a id="mask-link" class="hidden" download>Download mask</a>
        </div>
        <div class="viewport">
          <div class="plane-tabs">
            ${PLANES.map((p) => `<button data-plane="${p}" class="tab">${p}</button>`).join('')}
            <span id="slice-label" class="muted"></span>
          </div>
          <canvas id="slice" width="512" height="512"></canvas>
        </div>
      </div>`;
    this.canvas = this.el<HTMLCanvasElement>('#slice');
    this.el<HTMLButtonElement>('#upload').addEventListener('click', () => this.upload());
    this.el<HTMLButtonElement>('#run').addEventListener('click', () => this.run());
    this.el<HTMLButtonElement>('#banner-close').addEventListener('click', () =>
      this.el('#banner').classList.add('hidden'),
    );
    this.root.querySelectorAll<HTMLButtonElement>('.tab').forEach((tab) =>
      tab.addEventListener('click', () => {
        this.state.setPlane(tab.dataset.plane as Plane);
        this.refreshSlice();
      }),
    );
    for (const name of ['delta', 'edge_mm', 'm', 'k'] as const) {
      const input = this.el<HTMLInputElement>(`#param-${name}`);
      input.addEventListener('change', () => {
        this.state.setParam(name as keyof typeof PARAM_RANGES, Number(input.value));
        input.value = String(this.state.params[name]);
      });
    }
    this.canvas.addEventListener('wheel', (event) => {
      event.preventDefault();
      this.state.stepIndex(event.deltaY > 0 ? 1 : -1);
      this.refreshSlice();
    });
    window.addEventListener('keydown', (event) => {
      if (event.key === 'ArrowUp' || event.key === 'ArrowDown') {
        this.state.stepIndex(event.key === 'ArrowDown' ? 1 : -1);
        this.refreshSlice();
      }
    });
    this.canvas.addEventListener('click', (event) => this.placeSeed(event));
    this.el<HTMLInputElement>('#file-ref-mhd').addEventListener('change', () =>
      this.uploadReference(),
    );
  }

  private banner(message: string): void {
    this.el('#banner-text').textContent = message;
    this.el('#banner').classList.remove('hidden');
  }

  private async upload(): Promise<void> {
    const mhd = this.el<HTMLInputElement>('#file-mhd').files?.[0];
    const raw = this.el<HTMLInputElement>('#file-raw').files?.[0];
    if (!mhd) {
      this.banner('choose a .mhd header first');
      return;
    }
    try {
      const info = await this.api.uploadVolume(mhd, raw);
      this.state.setVolume(info);
      this.el('#volume-info').textContent =
        `#${info.volume_id}  ${info.dims.join('×')} @ ${info.spacing.join('/')} mm`;
      this.refreshSlice();
    } catch (err) {
      this.banner(String(err instanceof Error ? err.message : err));
    }
  }

  private async uploadReference(): Promise<void> {
    const mhd = this.el<HTMLInputElement>('#file-ref-mhd').files?.[0];
    const raw = this.el<HTMLInputElement>('#file-ref-raw').files?.[0];
    if (!mhd) return;
    try {
      const info = await this.api.uploadVolume(mhd, raw);
      this.state.referenceId = info.volume_id;
      await this.updateDsc();
    } catch (err) {
      this.banner(String(err instanceof Error ? err.message : err));
    }
  }

  private placeSeed(event: MouseEvent): void {
    const info = this.state.volume;
    if (!info) return;
    const { rows, cols } = sliceShape(info, this.state.plane);
    const rect = this.canvas.getBoundingClientRect();
    const col = ((event.clientX - rect.left) / rect.width) * cols - 0.5;
    const row = ((event.clientY - rect.top) / rect.height) * rows - 0.5;
    this.state.seedMm = pixelToMm(info, this.state.plane, this.state.index, row, col);
    const [x, y, z] = this.state.seedMm;
    this.el('#seed-info').textContent = `seed: (${x.toFixed(1)}, ${y.toFixed(1)}, ${z.toFixed(1)}) mm`;
    this.el<HTMLButtonElement>('#run').disabled = false;
    this.refreshSlice();
  }

  private async run(): Promise<void> {
    const info = this.state.volume;
    if (!info || !this.state.seedMm) return;
    if (!this.state.beginRun()) return;
    const runButton = this.el<HTMLButtonElement>('#run');
    runButton.disabled = true;
    runButton.textContent = 'Running…';
    try {
      const result = await this.api.segment(info.volume_id, {
        seed_mm: this.state.seedMm,
        ...this.state.params,
      });
      this.state.endRun(result);
      this.el('#warnings').textContent = result.warnings.join('\n');
      const link = this.el<HTMLAnchorElement>('#mask-link');
      link.href = this.api.maskUrl(result.mask_id);
      link.classList.remove('hidden');
      await this.updateDsc();
      this.refreshSlice();
    } catch (err) {
      this.state.endRun(null);
      this.banner(String(err instanceof Error ? err.message : err));
    } finally {
      runButton.disabled = false;
      runButton.textContent = 'Run segmentation';
    }
  }

  private async updateDsc(): Promise<void> {
    const panel = this.el('#dsc-panel');
    if (!this.state.result || this.state.referenceId === null) return;
    try {
      const score = await this.api.dsc(this.state.result.mask_id, this.state.referenceId);
      panel.textContent = `DSC: ${score.toFixed(4)}`;
    } catch (err) {
      this.banner(String(err instanceof Error ? err.message : err));
    }
  }

  private refreshSlice(): void {
    const info = this.state.volume;
    if (!info) return;
    const label = `${this.state.plane} ${this.state.index + 1} / ${planeCount(info, this.state.plane)}`;
    this.el('#slice-label').textContent = label;
    const image = new Image();
    image.onload = () => {
      this.sliceImage = image;
      this.draw();
    };
    image.src = this.api.sliceUrl(info.volume_id, this.state.plane, this.state.index);
  }

  private draw(): void {
    const info = this.state.volume;
    const ctx = this.canvas.getContext('2d');
    if (!info || !ctx || !this.sliceImage) return;
    const { rows, cols } = sliceShape(info, this.state.plane);
    const scaleX = this.canvas.width / cols;
    const scaleY = this.canvas.height / rows;
    ctx.imageSmoothingEnabled = false;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    ctx.drawImage(this.sliceImage, 0, 0, this.canvas.width, this.canvas.height);
    ctx.strokeStyle = '#ff4040';
    ctx.lineWidth = 1.5;
    for (const polyline of this.state.currentContours()) {
      ctx.beginPath();
      polyline.forEach(([x, y], i) => {
        const px = (x + 0.5) * scaleX;
        const py = (y + 0.5) * scaleY;
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      });
      ctx.stroke();
    }
    if (this.state.seedMm) {
      const { index, row, col } = mmToPixel(info, this.state.plane, this.state.seedMm);
      if (Math.abs(index - this.state.index) < 0.5 + 1e-9) {
        ctx.strokeStyle = '#40c040';
        ctx.beginPath();
        ctx.arc((col + 0.5) * scaleX, (row + 0.5) * scaleY, 5, 0, 2 * Math.PI);
        ctx.stroke();
      }
    }
  }
}
